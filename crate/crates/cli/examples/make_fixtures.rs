//! Regenerates the shipped CSV fixtures:
//!
//! * `demo.csv`: 200 rows in the liver dataset's raw layout (long Kaggle
//!   headers, labels 1/2, a few missing cells). Liver enzymes and bilirubin
//!   are log-normal with class-dependent location; age and gender carry no
//!   signal.
//! * `mixture.csv`: 5,000 rows, five features, two unit-variance Gaussian
//!   classes with means ±0.9 on every feature.
//!
//! Run with `cargo run -p stackliver-cli --example make_fixtures [DIR]`.

use std::path::PathBuf;

use stackliver::numerics::Rng;
use stackliver::synth::{gaussian_mixture, shuffled};

fn lognormal(rng: &mut Rng, median: f64, spread: f64) -> f64 {
    median * (spread * rng.normal()).exp()
}

fn demo(dir: &PathBuf) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(dir.join("demo.csv"))?;
    w.write_record([
        "Age of the patient",
        "Gender of the patient",
        "Total Bilirubin",
        "Direct Bilirubin",
        "\u{a0}Alkphos Alkaline Phosphotase",
        "\u{a0}Sgpt Alamine Aminotransferase",
        "Sgot Aspartate Aminotransferase",
        "Total Protiens",
        "\u{a0}ALB Albumin",
        "A/G Ratio Albumin and Globulin Ratio",
        "Result",
    ])?;
    let mut rng = Rng::new(2024);
    for i in 0..200 {
        // Raw label 1 (about 70% of rows) is the disease class.
        let disease = rng.next_f64() < 0.7;
        let f = if disease { 1.0 } else { 0.0 };
        let age = 20.0 + (rng.next_f64() * 60.0).floor();
        let gender = if rng.next_f64() < 0.75 { "Male" } else { "Female" };
        let tb = lognormal(&mut rng, 0.9 + 1.6 * f, 0.35);
        let db = tb * (0.25 + 0.1 * rng.next_f64());
        let alp = lognormal(&mut rng, 180.0 + 160.0 * f, 0.25);
        let alt = lognormal(&mut rng, 25.0 + 45.0 * f, 0.3);
        let ast = lognormal(&mut rng, 30.0 + 10.0 * f, 0.3);
        let tp = 6.5 + 0.8 * rng.normal();
        let alb = 3.4 - 0.4 * f + 0.4 * rng.normal();
        let ag = (alb / (tp - alb).max(0.5)).max(0.1);
        let cell = |v: f64, digits: usize| format!("{v:.digits$}");
        let mut row = vec![
            cell(age, 0),
            gender.to_string(),
            cell(tb, 2),
            cell(db, 2),
            cell(alp, 0),
            cell(alt, 0),
            cell(ast, 0),
            cell(tp, 1),
            cell(alb, 1),
            cell(ag, 2),
            if disease { "1" } else { "2" }.to_string(),
        ];
        if i % 37 == 5 {
            row[1].clear();
        }
        if i % 53 == 11 {
            row[9].clear();
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn mixture(dir: &PathBuf) -> csv::Result<()> {
    let (x, y) = gaussian_mixture(5000, 5, 5, 1.8, 7);
    let (x, y) = shuffled(&x, &y, 8);
    let mut w = csv::Writer::from_path(dir.join("mixture.csv"))?;
    w.write_record(["x1", "x2", "x3", "x4", "x5", "y"])?;
    for (row, label) in x.iter_rows().zip(&y) {
        let mut rec: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
        rec.push((label + 1).to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn main() -> csv::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    std::fs::create_dir_all(&dir)?;
    demo(&dir)?;
    mixture(&dir)?;
    println!("fixtures written to {}", dir.display());
    Ok(())
}
