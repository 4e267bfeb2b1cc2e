use std::io::Write;
use std::time::Instant;

use bdiv::examples::nirenberg_field;
use bdiv::norms::l2;
use bdiv::variational::{helmholtz_solve, two_step_with, VariationalConfig};
use serde::Serialize;

/// Grid sizes the benchmark accepts.
pub const TABLE1_GRIDS: [usize; 5] = [50, 100, 200, 400, 800];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub n: usize,
    pub helmholtz_ratio: Option<f64>,
    pub twostep_ratio: Option<f64>,
    pub runtime_s: f64,
    pub converged: bool,
    pub error: Option<String>,
}

fn row(n: usize, solver: VariationalConfig) -> Result<(f64, f64, bool), bdiv::Error> {
    let f = nirenberg_field(n)?;
    let fnorm = l2(&f);
    let hel = helmholtz_solve(&f)?.linf() / fnorm;
    let (_, rep) = two_step_with(&f, solver)?;
    Ok((hel, rep.ratio, rep.solver.converged))
}

/// `||u||_∞ / ||f^N||_2` of the Helmholtz and the two-step solutions of the
/// Nirenberg data, one row per grid. Failures land in the row's `error`.
pub fn table1(grids: &[usize], solver: VariationalConfig) -> Vec<Table1Row> {
    grids
        .iter()
        .map(|&n| {
            let t = Instant::now();
            let res = row(n, solver);
            let runtime_s = t.elapsed().as_secs_f64();
            match res {
                Ok((h, s, converged)) => Table1Row {
                    n,
                    helmholtz_ratio: Some(h),
                    twostep_ratio: Some(s),
                    runtime_s,
                    converged,
                    error: None,
                },
                Err(e) => Table1Row {
                    n,
                    helmholtz_ratio: None,
                    twostep_ratio: None,
                    runtime_s,
                    converged: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

pub fn write_csv<W: Write>(rows: &[Table1Row], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["N", "helmholtz_ratio", "twostep_ratio", "runtime", "converged", "error"])?;
    let num = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.n.to_string(),
            num(r.helmholtz_ratio),
            num(r.twostep_ratio),
            format!("{:.3}", r.runtime_s),
            r.converged.to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
