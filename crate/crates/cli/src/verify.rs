//! Seeded invariant suites behind `bdiv verify`.

use std::path::Path;

use bdiv::examples::{ball_field, nirenberg_field, random_field, tatar_pair, ExampleSpec, RandomLaw};
use bdiv::explicit::{decompose_weak_l2, split_disjoint_2d, split_inductive_nd, split_onestep_2d, SplitResult};
use bdiv::io::{decode_field, encode_field};
use bdiv::norms::{l2, lorentz_norm, lp_norm, tv_norm, weak_lp_setnorm, TvVariant};
use bdiv::ops::{cumulative_primitive, discrete_divergence, forward_gradient};
use bdiv::variational::{
    helmholtz_solve, hierarchical_p2, minimize_flambda, residual_tv, HierarchyConfig, VariationalConfig,
};
use bdiv::{mean_zero, Grid, ScalarField, VectorField};
use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Module {
    Fields,
    Norms,
    Explicit,
    Variational,
    Examples,
}

impl Module {
    pub const ALL: [Module; 5] = [Module::Fields, Module::Norms, Module::Explicit, Module::Variational, Module::Examples];

    pub fn name(self) -> &'static str {
        match self {
            Module::Fields => "fields",
            Module::Norms => "norms",
            Module::Explicit => "explicit",
            Module::Variational => "variational",
            Module::Examples => "examples",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub module: String,
    pub invariant: String,
    pub passed: bool,
    pub detail: String,
}

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn core<T>(r: bdiv::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn shapes() -> Vec<(Vec<usize>, Vec<bool>)> {
    vec![
        (vec![7], vec![true]),
        (vec![5, 6], vec![false, true]),
        (vec![8, 8], vec![true, true]),
        (vec![3, 4, 5], vec![true, false, true]),
        (vec![4, 4, 4], vec![false, false, false]),
    ]
}

fn grid(shape: &[usize], periodic: &[bool]) -> Grid {
    let d = shape.len();
    Grid::new(shape, &vec![0.0; d], &vec![1.0; d], periodic).expect("valid test grid")
}

fn noise(seed: u64, g: &Grid) -> Result<ScalarField, String> {
    core(random_field(seed, g, RandomLaw::Gaussian))
}

fn adjointness() -> Result<String, String> {
    let mut worst = 0.0f64;
    for (i, (s, p)) in shapes().into_iter().enumerate() {
        let g = grid(&s, &p);
        let phi = noise(i as u64, &g)?;
        let comps = (0..g.dim()).map(|a| noise(100 + (i * 3 + a) as u64, &g)).collect::<Result<Vec<_>, _>>()?;
        let v = core(VectorField::new(comps))?;
        let lhs = core(discrete_divergence(&v).inner(&phi))?;
        let rhs = -core(v.inner(&forward_gradient(&phi)))?;
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    ensure(worst <= 1e-12, || format!("<div v, g> + <v, grad g> off by {worst:e}"))?;
    Ok(format!("max relative gap {worst:.1e}"))
}

fn primitive_inverts() -> Result<String, String> {
    let g = grid(&[6, 5, 4], &[false; 3]);
    let f = noise(7, &g)?;
    for axis in 0..3 {
        let v = core(VectorField::single(core(cumulative_primitive(&f, axis))?, axis))?;
        let err = core(discrete_divergence(&v).sub(&f))?.max_abs();
        ensure(err <= 1e-12 * f.max_abs(), || format!("axis {axis}: error {err:e}"))?;
    }
    Ok("3 axes exact".into())
}

fn io_roundtrip() -> Result<String, String> {
    for (i, (s, p)) in shapes().into_iter().enumerate() {
        let f = noise(i as u64, &grid(&s, &p))?;
        let back = core(decode_field(&encode_field(&f)))?;
        ensure(back == f, || format!("shape {s:?} changed on round trip"))?;
    }
    Ok("5 grids bit-identical".into())
}

fn lorentz_diagonal() -> Result<String, String> {
    let f = noise(3, &grid(&[9, 7], &[false, false]))?;
    for p in [1.0, 1.5, 2.0, 3.0] {
        let (a, b) = (core(lorentz_norm(&f, p, p))?, core(lp_norm(&f, p))?);
        ensure((a - b).abs() <= 1e-12 * b, || format!("p = {p}: {a} vs {b}"))?;
    }
    Ok("p in {1, 1.5, 2, 3}".into())
}

fn weak_brute_force() -> Result<String, String> {
    let g = grid(&[4, 4], &[false, false]);
    let cv = g.cell_volume();
    for seed in 0..5 {
        let f = noise(seed, &g)?;
        let v = f.values();
        let mut best = 0.0f64;
        for set in 1u32..(1 << 16) {
            let s: f64 = (0..16).filter(|i| set >> i & 1 == 1).map(|i| v[i].abs()).sum();
            let k = set.count_ones() as f64;
            best = best.max(s * cv / (k * cv).sqrt());
        }
        let w = core(weak_lp_setnorm(&f, 2.0))?;
        ensure((w - best).abs() <= 1e-12 * best, || format!("seed {seed}: {w} vs {best}"))?;
    }
    Ok("5 fields, 65535 subsets each".into())
}

fn weak_below_strong() -> Result<String, String> {
    let f = noise(11, &grid(&[6, 6, 6], &[false; 3]))?;
    for p in [1.5, 2.0, 3.0] {
        let (w, s) = (core(weak_lp_setnorm(&f, p))?, core(lp_norm(&f, p))?);
        ensure(w <= s * (1.0 + 1e-12), || format!("p = {p}: {w} > {s}"))?;
    }
    Ok("p in {1.5, 2, 3}".into())
}

fn coarea() -> Result<String, String> {
    let g = grid(&[10, 9], &[true, false]);
    let f = core(noise(2, &g)?.map(|x| (2.0 * x).round()))?;
    let (lo, hi) = f.values().iter().fold((0i64, 0i64), |(a, b), &x| (a.min(x as i64), b.max(x as i64)));
    let mut levels = 0.0;
    for t in lo..hi {
        let chi = core(f.map(|x| if x > t as f64 + 0.5 { 1.0 } else { 0.0 }))?;
        levels += tv_norm(&chi, TvVariant::Anisotropic);
    }
    let total = tv_norm(&f, TvVariant::Anisotropic);
    ensure((total - levels).abs() <= 1e-12 * total, || format!("{total} vs {levels}"))?;
    Ok(format!("{} level sets", hi - lo))
}

fn check_split(f: &ScalarField, s: &SplitResult, rel: f64) -> Result<(), String> {
    let err = core(discrete_divergence(&s.u).sub(f))?.max_abs();
    ensure(err <= 1e-10 * f.max_abs().max(f64::MIN_POSITIVE), || format!("div u - f = {err:e}"))?;
    ensure(s.certificates.iter().all(|c| c.holds(rel)), || {
        format!("certificate excess {:e}", s.max_certificate_excess())
    })
}

fn onestep_suite() -> Result<String, String> {
    for seed in 0..20 {
        let n = 4 + (seed as usize * 7) % 29;
        let f = noise(seed, &grid(&[n, n + 3], &[false, false]))?;
        check_split(&f, &core(split_onestep_2d(&f))?, 1e-12)?;
        check_split(&f, &core(split_disjoint_2d(&f))?, 1e-12)?;
    }
    Ok("20 fields".into())
}

fn inductive_suite() -> Result<String, String> {
    for seed in 0..5 {
        let f = noise(seed, &grid(&[8, 8, 8], &[false; 3]))?;
        let s = core(split_inductive_nd(&f))?;
        check_split(&f, &s, 1e-10)?;
        let covered = s.masks.iter().map(|m| m.count()).sum::<usize>();
        ensure(covered == f.support().count(), || "masks do not partition the support".into())?;
    }
    Ok("5 fields on 8^3".into())
}

fn strips_suite() -> Result<String, String> {
    let g = grid(&[48, 48], &[false, false]);
    for seed in 0..5 {
        let f = core(random_field(seed, &g, RandomLaw::Spikes { count: 30, amplitude: 20.0 }))?;
        let (s, trace) = core(decompose_weak_l2(&f, 2.0, 64))?;
        ensure(trace.complete, || format!("seed {seed}: incomplete"))?;
        check_split(&f, &s, 1e-12)?;
        for (k, p) in trace.passes.iter().enumerate() {
            let cap = g.volume() * 0.25f64.powi(k as i32);
            ensure(p.measure <= cap * (1.0 + 1e-12), || format!("seed {seed} pass {k}: {} > {cap}", p.measure))?;
        }
    }
    Ok("5 spike fields".into())
}

fn helmholtz_round_trip() -> Result<String, String> {
    for (i, (s, _)) in shapes().into_iter().enumerate() {
        let g = grid(&s, &vec![true; s.len()]);
        let f = mean_zero(&noise(i as u64, &g)?);
        let u = core(helmholtz_solve(&f))?;
        let err = core(discrete_divergence(&u).sub(&f))?.max_abs();
        ensure(err <= 1e-10 * f.max_abs(), || format!("shape {s:?}: {err:e}"))?;
    }
    Ok("5 periodic grids".into())
}

fn minimizer_contract() -> Result<String, String> {
    let g = grid(&[16, 16], &[true, true]);
    for seed in 0..3 {
        let f = mean_zero(&noise(seed, &g)?);
        let thr = 1.0 / residual_tv(&f, 2);
        let (u, _, rep) = core(minimize_flambda(&f, &VariationalConfig::new(0.5 * thr, 2)))?;
        ensure(u.is_zero() && rep.trivial, || "below threshold must give u = 0".into())?;
        let (_, _, rep) = core(minimize_flambda(&f, &VariationalConfig::new(20.0 * thr, 2)))?;
        ensure(rep.converged, || format!("seed {seed}: not converged"))?;
        ensure(rep.objective <= rep.objective_zero, || "objective above the trivial bound".into())?;
        ensure(rep.certificate <= 1.0 + 1e-2, || format!("certificate {}", rep.certificate))?;
    }
    Ok("3 fields".into())
}

fn telescoping() -> Result<String, String> {
    let g = grid(&[16, 16], &[true, true]);
    let f = mean_zero(&noise(42, &g)?);
    let (u, trace) = core(hierarchical_p2(&f, &HierarchyConfig::p2()))?;
    let last = trace.levels.last().ok_or("empty trace")?;
    let r = core(f.sub(&discrete_divergence(&u)))?;
    let gap = (l2(&r) - last.residual_norm).abs();
    ensure(gap <= 1e-10 * l2(&f), || format!("telescoping gap {gap:e}"))?;
    ensure(trace.reached_target, || "residual target not reached".into())?;
    Ok(format!("{} levels", trace.levels.len()))
}

fn nirenberg_symmetry() -> Result<String, String> {
    let n = 32;
    let f = core(nirenberg_field(n))?;
    let v = f.values();
    let odd = (0..n * n).all(|k| (v[k] + v[(n - 1 - k / n) * n + k % n]).abs() <= 1e-12 * f.max_abs());
    ensure(odd, || "not odd in x1".into())?;
    ensure(f.mean().abs() <= 1e-12 * f.max_abs(), || "not mean-zero".into())?;
    Ok("odd, mean-zero".into())
}

fn ball_and_tatar() -> Result<String, String> {
    let f = core(ball_field(1.0, 1.0, 64, 2.0))?;
    let h = f.grid().spacing(0);
    let err = (f.integral() - std::f64::consts::PI).abs();
    ensure(err <= 2.0 * std::f64::consts::PI * h, || format!("ball area off by {err}"))?;
    let (tf, tg) = core(tatar_pair(2.0, 6, 1 << 9))?;
    let dominated = tf.values().iter().zip(tg.values()).all(|(a, b)| b.abs() <= *a);
    ensure(dominated, || "|g| > f somewhere".into())?;
    Ok("area and domination".into())
}

fn regeneration() -> Result<String, String> {
    let spec = ExampleSpec::Random { seed: 9, n: 12, dim: 2, law: RandomLaw::Gaussian, periodic: true };
    ensure(core(spec.generate())? == core(spec.generate())?, || "not bit-identical".into())?;
    Ok("bit-identical".into())
}

fn checks(module: Module) -> Vec<(&'static str, Check)> {
    match module {
        Module::Fields => vec![
            ("div_grad_adjoint", adjointness as Check),
            ("primitive_inverts_divergence", primitive_inverts),
            ("io_roundtrip", io_roundtrip),
        ],
        Module::Norms => vec![
            ("lorentz_diagonal_is_lp", lorentz_diagonal as Check),
            ("weak_set_norm_brute_force", weak_brute_force),
            ("weak_below_strong", weak_below_strong),
            ("coarea", coarea),
        ],
        Module::Explicit => vec![
            ("onestep_and_disjoint", onestep_suite as Check),
            ("inductive_3d", inductive_suite),
            ("weak_l2_strips", strips_suite),
        ],
        Module::Variational => vec![
            ("helmholtz_round_trip", helmholtz_round_trip as Check),
            ("minimizer_contract", minimizer_contract),
            ("hierarchy_telescoping", telescoping),
        ],
        Module::Examples => vec![
            ("nirenberg_symmetry", nirenberg_symmetry as Check),
            ("ball_and_tatar", ball_and_tatar),
            ("regeneration", regeneration),
        ],
    }
}

pub fn run_modules(modules: &[Module]) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for &m in modules {
        for (name, check) in checks(m) {
            let (passed, detail) = match check() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            out.push(CheckResult { module: m.name().into(), invariant: name.into(), passed, detail });
        }
    }
    out
}

/// Decodes a field file and checks the format invariants.
pub fn check_file(path: &Path) -> CheckResult {
    let res = std::fs::read(path)
        .map_err(|e| e.to_string())
        .and_then(|b| decode_field(&b).map_err(|e| e.to_string()));
    CheckResult {
        module: "io".into(),
        invariant: format!("decode:{}", path.display()),
        passed: res.is_ok(),
        detail: match res {
            Ok(f) => format!("{} cells", f.len()),
            Err(e) => e,
        },
    }
}
