use std::io::Write;
use std::path::{Path, PathBuf};

use bdiv::examples::{ExampleSpec, RandomLaw};
use bdiv::explicit::{
    decompose_weak_l2, split_disjoint_2d, split_inductive_nd, split_onestep_2d, LineCertificate, SplitResult,
};
use bdiv::norms::{l2, norm, NormKind, TvVariant};
use bdiv::ops::discrete_divergence;
use bdiv::variational::{
    helmholtz_solve, helmholtz_solve_with, hierarchical_p1, hierarchical_p2, two_step_with, HelmholtzOptions,
    HelmholtzSymbol, HierarchyConfig, HierarchyTrace, VariationalConfig,
};
use bdiv::{mean_zero, ScalarField, VectorField};
use serde::Serialize;
use serde_json::json;

use crate::bench::{table1, write_csv, TABLE1_GRIDS};
use crate::manifest::{with_suffix, RunManifest};
use crate::verify::{check_file, run_modules, Module};
use crate::{BenchCommand, CliError, Command, GenArgs, Kind, Law, Method, NormsArgs, SolveArgs, VerifyArgs};

/// Relative tolerance of `div u = f` for the exact constructions.
const DIV_TOL: f64 = 1e-10;

pub fn dispatch(cmd: Command, words: Vec<String>) -> Result<(), CliError> {
    match cmd {
        Command::Gen(a) => gen(a, words),
        Command::Solve(a) => solve(a, words),
        Command::Norms(a) => norms(a, words),
        Command::Bench { which: BenchCommand::Table1 { grids, out, tol_objective } } => {
            bench_table1(&grids, out.as_deref(), tol_objective, words)
        }
        Command::Verify(a) => verify(a),
    }
}

fn emit(value: &serde_json::Value, report: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
    match report {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct FieldSummary {
    shape: Vec<usize>,
    periodic: Vec<bool>,
    integral: f64,
    l2: f64,
    max_abs: f64,
}

fn summary(f: &ScalarField) -> FieldSummary {
    FieldSummary {
        shape: f.grid().shape().to_vec(),
        periodic: f.grid().periodic().to_vec(),
        integral: f.integral(),
        l2: l2(f),
        max_abs: f.max_abs(),
    }
}

fn example_spec(a: &GenArgs) -> ExampleSpec {
    match a.kind {
        Kind::Nirenberg => ExampleSpec::Nirenberg { n: a.n },
        Kind::Ball => ExampleSpec::Ball { alpha: a.alpha, radius: a.radius, n: a.n, half_width: a.half_width },
        Kind::Tatar => ExampleSpec::Tatar { p: a.p, levels: a.levels, n: a.n },
        Kind::Random => {
            let law = match a.law {
                Law::Gaussian => RandomLaw::Gaussian,
                Law::Spikes => RandomLaw::Spikes { count: a.count, amplitude: a.amplitude },
            };
            ExampleSpec::Random { seed: a.seed, n: a.n, dim: a.dim, law, periodic: a.periodic }
        }
    }
}

/// `dir/name.ext` -> `dir/name_g.ext`.
fn second_output(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}_g.{}", ext.to_string_lossy()),
        None => format!("{stem}_g"),
    };
    out.with_file_name(name)
}

fn gen(a: GenArgs, words: Vec<String>) -> Result<(), CliError> {
    let spec = example_spec(&a);
    let mut m = RunManifest::start(words, &spec);
    let fields = spec.generate()?;
    let mut paths = vec![a.out.clone()];
    if fields.len() == 2 {
        paths.push(a.out_g.clone().unwrap_or_else(|| second_output(&a.out)));
    }
    for (p, f) in paths.iter().zip(&fields) {
        m.write_field(p, f)?;
    }
    m.finish();
    let out = json!({
        "manifest": m,
        "spec": spec,
        "fields": fields.iter().map(summary).collect::<Vec<_>>(),
    });
    emit(&out, a.report.as_deref())
}

#[derive(Serialize)]
struct Verification {
    /// `max |div u - target| / max |target|`; `None` when no exact identity
    /// is claimed.
    div_residual_rel: Option<f64>,
    tolerance: Option<f64>,
    component_linf: Vec<f64>,
    linf: f64,
    certificates_max_excess: Option<f64>,
    certificates_hold: Option<bool>,
    /// Hierarchies: `| ||f - div U|| - ||r_last|| | / ||f||`.
    telescoping_gap: Option<f64>,
    passed: bool,
}

fn div_residual(u: &VectorField, target: &ScalarField) -> Result<f64, CliError> {
    let err = discrete_divergence(u).sub(target)?.max_abs();
    Ok(err / target.max_abs().max(f64::MIN_POSITIVE))
}

fn base_verification(u: &VectorField) -> Verification {
    Verification {
        div_residual_rel: None,
        tolerance: None,
        component_linf: u.linf_components(),
        linf: u.linf(),
        certificates_max_excess: None,
        certificates_hold: None,
        telescoping_gap: None,
        passed: true,
    }
}

fn write_u(m: &mut RunManifest, out: &Path, u: &VectorField) -> Result<(), CliError> {
    for (k, c) in u.components().iter().enumerate() {
        m.write_field(&with_suffix(out, &format!(".u{k}.bdiv")), c)?;
    }
    Ok(())
}

fn certificates_csv(certs: &[LineCertificate]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Usage(e.to_string());
    w.write_record(["axis", "index", "value", "bound"]).map_err(io)?;
    for c in certs {
        w.write_record([c.axis.to_string(), c.index.to_string(), format!("{:e}", c.value), format!("{:e}", c.bound)])
            .map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Usage(e.to_string()))
}

fn levels_csv(t: &HierarchyTrace) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Usage(e.to_string());
    w.write_record([
        "level", "lambda", "u_linf", "residual_norm", "residual_tv", "ratio", "cumulative_linf", "iterations", "converged",
    ])
    .map_err(io)?;
    for l in &t.levels {
        w.write_record([
            l.level.to_string(),
            format!("{:e}", l.lambda),
            format!("{:e}", l.u_linf),
            format!("{:e}", l.residual_norm),
            format!("{:e}", l.residual_tv),
            format!("{:e}", l.ratio),
            format!("{:e}", l.cumulative_linf),
            l.iterations.to_string(),
            l.converged.to_string(),
        ])
        .map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Usage(e.to_string()))
}

struct Solved {
    report: serde_json::Value,
    verification: Verification,
    /// Non-convergence message, if any.
    stalled: Option<String>,
}

fn explicit(f: &ScalarField, s: SplitResult, m: &mut RunManifest, out: &Path) -> Result<Verification, CliError> {
    write_u(m, out, &s.u)?;
    m.write_bytes(&with_suffix(out, ".certificates.csv"), &certificates_csv(&s.certificates)?)?;
    let mut v = base_verification(&s.u);
    let rel = div_residual(&s.u, f)?;
    let hold = s.certificates.iter().all(|c| c.holds(DIV_TOL));
    v.div_residual_rel = Some(rel);
    v.tolerance = Some(DIV_TOL);
    v.certificates_max_excess = Some(s.max_certificate_excess()).filter(|x| x.is_finite());
    v.certificates_hold = Some(hold);
    v.passed = rel <= DIV_TOL && hold;
    Ok(v)
}

fn solver_config(a: &SolveArgs) -> VariationalConfig {
    VariationalConfig {
        max_iters: a.max_iters,
        tol_objective: a.tol_objective,
        tol_residual: a.tol_residual,
        ..VariationalConfig::new(1.0, 2)
    }
}

fn hierarchy(
    f: &ScalarField,
    res: (VectorField, HierarchyTrace),
    m: &mut RunManifest,
    out: &Path,
) -> Result<Solved, CliError> {
    let (u, trace) = res;
    write_u(m, out, &u)?;
    let r = f.sub(&discrete_divergence(&u))?;
    m.write_field(&with_suffix(out, ".residual.bdiv"), &r)?;
    m.write_bytes(&with_suffix(out, ".levels.csv"), &levels_csv(&trace)?)?;
    let mut v = base_verification(&u);
    let last = trace.levels.last().map(|l| l.residual_norm).unwrap_or(trace.f_norm);
    let gap = (l2(&r) - last).abs() / trace.f_norm.max(f64::MIN_POSITIVE);
    v.telescoping_gap = Some(gap);
    v.tolerance = Some(DIV_TOL);
    v.passed = gap <= DIV_TOL;
    let stalled = if trace.stagnated {
        Some("residual stagnated".to_string())
    } else if trace.levels.iter().any(|l| !l.converged) {
        Some("a level solve hit max_iters".to_string())
    } else {
        None
    };
    let eta_measured = trace.eta_measured(f);
    let mut report = serde_json::to_value(&trace).expect("trace serializes");
    report["eta_measured"] = json!(eta_measured);
    Ok(Solved { report, verification: v, stalled })
}

fn solve_method(a: &SolveArgs, f: &ScalarField, m: &mut RunManifest) -> Result<Solved, CliError> {
    let out = a.out.as_path();
    let plain = |verification| Solved { report: serde_json::Value::Null, verification, stalled: None };
    match a.method {
        Method::Onestep2d => Ok(plain(explicit(f, split_onestep_2d(f)?, m, out)?)),
        Method::Disjoint2d => Ok(plain(explicit(f, split_disjoint_2d(f)?, m, out)?)),
        Method::Inductive => Ok(plain(explicit(f, split_inductive_nd(f)?, m, out)?)),
        Method::Weakl2 => {
            let (s, trace) = decompose_weak_l2(f, a.tau, a.max_passes)?;
            let v = explicit(f, s, m, out)?;
            let stalled = (!trace.complete).then(|| format!("{} passes did not exhaust the data", trace.passes.len()));
            Ok(Solved { report: serde_json::to_value(&trace).expect("trace serializes"), verification: v, stalled })
        }
        Method::Helmholtz => {
            let symbol = if a.continuum { HelmholtzSymbol::Continuum } else { HelmholtzSymbol::Discrete };
            let u = helmholtz_solve_with(f, HelmholtzOptions { symbol, strict_mean_zero: a.strict_mean })?;
            write_u(m, out, &u)?;
            let target = mean_zero(f);
            let mut v = base_verification(&u);
            let rel = div_residual(&u, &target)?;
            v.div_residual_rel = Some(rel);
            if !a.continuum {
                v.tolerance = Some(DIV_TOL);
                v.passed = rel <= DIV_TOL;
            }
            let fnorm = l2(f);
            let report = json!({
                "symbol": symbol,
                "mean_removed": f.mean(),
                "ratio": if fnorm > 0.0 { u.linf() / fnorm } else { 0.0 },
            });
            Ok(Solved { report, verification: v, stalled: None })
        }
        Method::Twostep => {
            let (u, rep) = two_step_with(f, solver_config(a))?;
            write_u(m, out, &u)?;
            let mut v = base_verification(&u);
            let rel = div_residual(&u, f)?;
            v.div_residual_rel = Some(rel);
            v.tolerance = Some(DIV_TOL);
            v.passed = rel <= DIV_TOL;
            let stalled = (!rep.solver.converged).then(|| "minimizer hit max_iters".to_string());
            Ok(Solved { report: serde_json::to_value(&rep).expect("report serializes"), verification: v, stalled })
        }
        Method::HierP2 => {
            let cfg = HierarchyConfig {
                eta: a.eta,
                lambda1: a.lambda,
                max_levels: a.levels,
                stop_residual: a.stop_residual,
                solver: solver_config(a),
                ..HierarchyConfig::p2()
            };
            hierarchy(f, hierarchical_p2(f, &cfg)?, m, out)
        }
        Method::HierP1 => {
            let gamma = match a.gamma {
                Some(g) => g,
                None => {
                    let fnorm = l2(f);
                    if fnorm == 0.0 {
                        1.0
                    } else {
                        helmholtz_solve(f)?.linf() / fnorm
                    }
                }
            };
            let cfg = HierarchyConfig {
                lambda1: a.lambda,
                max_levels: a.levels,
                stop_residual: a.stop_residual,
                solver: VariationalConfig { p: 1, ..solver_config(a) },
                ..HierarchyConfig::p1(gamma)
            };
            let mut s = hierarchy(f, hierarchical_p1(f, &cfg)?, m, out)?;
            s.report["gamma_assumed"] = json!(gamma);
            Ok(s)
        }
    }
}

#[derive(Serialize)]
struct SolveConfig<'a> {
    method: Method,
    input: &'a Path,
    out: &'a Path,
    tau: f64,
    max_passes: usize,
    lambda: Option<f64>,
    eta: Option<f64>,
    gamma: Option<f64>,
    levels: usize,
    stop_residual: f64,
    max_iters: usize,
    tol_objective: f64,
    tol_residual: f64,
    continuum: bool,
    strict_mean: bool,
}

fn solve(a: SolveArgs, words: Vec<String>) -> Result<(), CliError> {
    let config = SolveConfig {
        method: a.method,
        input: &a.input,
        out: &a.out,
        tau: a.tau,
        max_passes: a.max_passes,
        lambda: a.lambda,
        eta: a.eta,
        gamma: a.gamma,
        levels: a.levels,
        stop_residual: a.stop_residual,
        max_iters: a.max_iters,
        tol_objective: a.tol_objective,
        tol_residual: a.tol_residual,
        continuum: a.continuum,
        strict_mean: a.strict_mean,
    };
    let mut m = RunManifest::start(words, &config);
    let f = m.read_field(&a.input)?;
    let solved = solve_method(&a, &f, &mut m)?;
    m.finish();
    let out = json!({
        "manifest": m,
        "method": a.method,
        "input": summary(&f),
        "report": solved.report,
        "verification": solved.verification,
    });
    emit(&out, a.report.as_deref())?;
    if !solved.verification.passed {
        return Err(CliError::Invariant("verification block failed".into()));
    }
    match solved.stalled {
        Some(msg) => Err(CliError::NotConverged(msg)),
        None => Ok(()),
    }
}

fn parse_kind(s: &str) -> Result<NormKind, CliError> {
    let bad = || CliError::Usage(format!("unknown norm kind '{s}'"));
    let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["lp", p] => Ok(NormKind::Lp { p: num(p)? }),
        ["linf"] => Ok(NormKind::Linf),
        ["lorentz", p, q] => Ok(NormKind::Lorentz { p: num(p)?, q: num(q)? }),
        ["weak", p] => Ok(NormKind::WeakLpSet { p: num(p)? }),
        ["morrey"] => Ok(NormKind::Morrey),
        ["tv"] => Ok(NormKind::Tv { variant: TvVariant::Isotropic }),
        ["tv-aniso"] => Ok(NormKind::Tv { variant: TvVariant::Anisotropic }),
        _ => Err(bad()),
    }
}

/// Largest field for which the quadratic Morrey scan runs by default.
const MORREY_DEFAULT_CELLS: usize = 4096;

fn default_kinds(f: &ScalarField) -> Vec<NormKind> {
    let d = f.grid().dim() as f64;
    let mut k = vec![NormKind::Lp { p: 1.0 }, NormKind::Lp { p: 2.0 }];
    if d > 2.0 {
        k.push(NormKind::Lp { p: d });
    }
    k.push(NormKind::Linf);
    k.push(NormKind::Lorentz { p: d, q: 1.0 });
    if d > 1.0 {
        k.push(NormKind::WeakLpSet { p: d });
    }
    if f.len() <= MORREY_DEFAULT_CELLS {
        k.push(NormKind::Morrey);
    }
    k.push(NormKind::Tv { variant: TvVariant::Isotropic });
    k.push(NormKind::Tv { variant: TvVariant::Anisotropic });
    k
}

fn norms(a: NormsArgs, words: Vec<String>) -> Result<(), CliError> {
    let mut m = RunManifest::start(words, json!({ "input": a.input, "kinds": a.kinds }));
    let kinds = a.kinds.iter().map(|s| parse_kind(s)).collect::<Result<Vec<_>, _>>()?;
    let f = m.read_field(&a.input)?;
    let kinds = if kinds.is_empty() { default_kinds(&f) } else { kinds };
    let mut values = Vec::new();
    for k in kinds {
        let v = norm(&f, k)?;
        values.push(json!({ "norm_kind": k.label(), "value": v }));
    }
    m.finish();
    emit(&json!({ "manifest": m, "norms": values }), a.report.as_deref())
}

fn bench_table1(grids: &[String], out: Option<&Path>, tol_objective: f64, words: Vec<String>) -> Result<(), CliError> {
    let mut ns = Vec::new();
    for g in grids.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
        let n: usize = g.parse().map_err(|_| CliError::Usage(format!("grid '{g}' is not an integer")))?;
        if !TABLE1_GRIDS.contains(&n) {
            return Err(CliError::Usage(format!("grid {n} not in {TABLE1_GRIDS:?}")));
        }
        ns.push(n);
    }
    let solver = VariationalConfig { tol_objective, ..VariationalConfig::new(1.0, 2) };
    let mut m = RunManifest::start(words, json!({ "grids": ns, "solver": solver }));
    let rows = table1(&ns, solver);
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).map_err(|e| CliError::Usage(e.to_string()))?;
    match out {
        Some(p) => {
            m.write_bytes(p, &buf)?;
            m.finish();
            emit(&json!({ "manifest": m, "rows": rows }), None)?;
        }
        None => {
            std::io::stdout().write_all(&buf).map_err(|e| CliError::Usage(e.to_string()))?;
        }
    }
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| r.error.is_some() || !r.converged)
        .map(|r| r.n.to_string())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::NotConverged(format!("grids {} failed", failed.join(","))))
    }
}

fn verify(a: VerifyArgs) -> Result<(), CliError> {
    let mut modules = a.modules.clone();
    if modules.is_empty() && a.inputs.is_empty() {
        modules = Module::ALL.to_vec();
    }
    modules.sort();
    modules.dedup();
    let mut results = run_modules(&modules);
    results.extend(a.inputs.iter().map(|p| check_file(p)));
    for r in &results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("{tag} {}::{} ({})", r.module, r.invariant, r.detail);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} checks, {} failed", results.len(), failed);
    if let Some(p) = &a.report {
        emit(&json!({ "checks": results }), Some(p))?;
    }
    if failed > 0 {
        return Err(CliError::Invariant(format!("{failed} check(s) failed")));
    }
    Ok(())
}
