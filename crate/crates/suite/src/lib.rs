//! Shared fixtures and a small pass/fail reporter for the acceptance run.

use std::time::Instant;

use isoprofile_core::kernels::CurvatureParams;

/// `(K, N, D)` over `K ∈ {−(N−1), 0, N−1}`, `N ∈ {1.5, 2, 3.7}`.
pub fn parameter_grid() -> Vec<CurvatureParams> {
    let mut out = Vec::new();
    for n in [1.5, 2.0, 3.7] {
        for sign in [-1.0, 0.0, 1.0] {
            let d = if sign > 0.0 { 2.5 } else { 1.0 };
            out.push(CurvatureParams::new(sign * (n - 1.0), n, d).expect("valid grid point"));
        }
    }
    out
}

pub const SPLITS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// Outcome of one criterion: `Ok(detail)` or `Err(reason)`.
pub type Check = Result<String, String>;

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

#[derive(Default)]
pub struct Report {
    results: Vec<(usize, &'static str, Check, f64)>,
}

impl Report {
    /// Runs `check`, catching panics, and prints its line.
    pub fn run(&mut self, id: usize, title: &'static str, check: impl FnOnce() -> Check + std::panic::UnwindSafe) {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {id:>2} {tag} [{secs:.2}s] {title}: {detail}");
        self.results.push((id, title, outcome, secs));
    }

    pub fn failures(&self) -> Vec<usize> {
        self.results.iter().filter(|r| r.2.is_err()).map(|r| r.0).collect()
    }
}
