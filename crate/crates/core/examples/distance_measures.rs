//! The three frame-level costs on a few hand-picked vectors.

use intel_align::distance::{cosine_distance, mae, mse};
use intel_align::DistanceKind;

fn main() -> intel_align::Result<()> {
    let pairs: [(&str, [f64; 2], [f64; 2]); 5] = [
        ("identical", [1.0, 2.0], [1.0, 2.0]),
        ("offset", [0.0, 0.0], [3.0, 4.0]),
        ("parallel", [1.0, 0.0], [2.0, 0.0]),
        ("orthogonal", [1.0, 0.0], [0.0, 1.0]),
        ("antiparallel", [1.0, 0.0], [-1.0, 0.0]),
    ];
    println!("{:<13} {:>8} {:>8} {:>8}", "pair", "MAE", "MSE", "CD");
    for (name, a, b) in pairs {
        println!(
            "{:<13} {:>8.3} {:>8.3} {:>8.3}",
            name,
            mae(&a, &b)?,
            mse(&a, &b)?,
            cosine_distance(&a, &b)?
        );
    }

    let a = [0.3f32, -1.2, 0.8];
    let b = [0.1f32, -0.9, 1.1];
    let scaled: Vec<f32> = a.iter().map(|v| v * 7.5).collect();
    println!();
    for kind in DistanceKind::ALL {
        println!(
            "{kind}: d(a,b) = {:.6}  d(7.5a,b) = {:.6}",
            kind.eval(&a, &b)?,
            kind.eval(&scaled, &b)?
        );
    }
    println!(
        "only CD is unchanged by scaling; a zero vector has CD 1 to anything: {}",
        cosine_distance(&[0.0, 0.0], &[1.0, 1.0])?
    );
    Ok(())
}
