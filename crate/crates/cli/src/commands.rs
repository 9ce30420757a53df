use std::path::Path;
use std::time::Instant;

use fj_core::fjseries::{fj_invert, fj_is_symmetric, fj_meromorphic_expansion, fj_pair, fj_tensor, FormalFJSeries};
use fj_core::jacobi::jacobi_basis;
use fj_core::lattice::{discriminant_form, EvenLattice};
use fj_core::ratio::{fmt_q64, parse_q64};
use fj_core::rep::{rep_trivial_dim, verify_representation, weil_rep_genus1, weil_rep_genus2, DiscriminantForm, Representation};
use fj_core::siegel::{expected_dimension, fj_to_siegel, SolveOptions, SymmetricSolver};
use serde_json::{json, Value};

use crate::config::{Cli, Command, FjCmd, JacobiCmd, LatticeCmd, SiegelCmd, WeilCmd};
use crate::output::{emit, read, read_json, sha256_hex, CliError};

type Res<T> = Result<T, CliError>;

/// All series stored in a file: a single series, an array, or an object
/// with a `basis` array (as written by `siegel solve`).
fn load_all_series(path: &Path) -> Res<Vec<FormalFJSeries>> {
    let v: Value = read_json(path)?;
    let items = match v {
        Value::Array(a) => a,
        Value::Object(ref o) if o.contains_key("basis") => o["basis"].as_array().cloned().unwrap_or_default(),
        other => vec![other],
    };
    items
        .into_iter()
        .map(|x| serde_json::from_value(x).map_err(|source| CliError::Json { path: path.to_path_buf(), source }))
        .collect()
}

fn load_series(path: &Path, index: usize) -> Res<FormalFJSeries> {
    let all = load_all_series(path)?;
    let n = all.len();
    all.into_iter()
        .nth(index)
        .ok_or_else(|| CliError::InvalidConfig(format!("{}: index {index} but file holds {n} series", path.display())))
}

/// `trivial`, `trivial^d` or a representation file.
fn load_rep(spec: &str) -> Res<Representation> {
    let rho = if spec == "trivial" {
        rep_trivial_dim(1)
    } else if let Some(d) = spec.strip_prefix("trivial^") {
        let d: usize = d.parse().ok().filter(|&d| d > 0).ok_or_else(|| CliError::InvalidConfig(format!("bad rep {spec:?}")))?;
        rep_trivial_dim(d)
    } else {
        read_json(Path::new(spec))?
    };
    let report = verify_representation(&rho);
    if !report.passed() {
        return Err(CliError::InvalidConfig(format!("representation {spec}: {}", report.violations.join("; "))));
    }
    Ok(rho)
}

fn load_disc(path: &Path) -> Res<DiscriminantForm> {
    read_json(path)
}

pub fn run(cli: &Cli) -> Res<()> {
    let cmd = &cli.command;
    cmd.validate()?;
    let start = Instant::now();
    let (artifact, extra) = execute(cmd)?;
    let inputs = cmd
        .inputs()
        .iter()
        .map(|p| Ok(json!({ "path": p.display().to_string(), "sha256": sha256_hex(&read(p)?) })))
        .collect::<Res<Vec<Value>>>()?;
    let manifest = json!({
        "tool": "fj",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cmd.name(),
        "config": cmd,
        "inputs": inputs,
        "threads": rayon::current_num_threads(),
        "elapsed_ms": start.elapsed().as_millis() as u64,
        "details": extra,
    });
    emit(cli.out.as_deref(), &artifact, manifest)
}

fn val<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("artifacts serialize")
}

/// Returns the artifact and manifest details.
fn execute(cmd: &Command) -> Res<(Value, Value)> {
    match cmd {
        Command::Jacobi(JacobiCmd::Basis { k, m, n }) => {
            let basis = jacobi_basis(&(*k).into(), *m, *n)?;
            let artifact = json!({
                "kind": "jacobi_basis",
                "k": k,
                "m": m,
                "N": n,
                "dimension": basis.len(),
                "basis": basis,
            });
            Ok((artifact, json!({ "dimension": basis.len() })))
        }
        Command::Fj(FjCmd::Check { path }) => {
            let all = load_all_series(path)?;
            let mut reports = Vec::new();
            let mut all_symmetric = true;
            for (i, f) in all.iter().enumerate() {
                let sym = fj_is_symmetric(f)?;
                all_symmetric &= sym.symmetric;
                let invalid = f.validate().err().map(|(m, r)| json!({ "m": m, "report": r }));
                reports.push(json!({
                    "index": i,
                    "weight": fmt_q64(&f.weight),
                    "M": f.m_trunc,
                    "N": fmt_q64(&f.qprec),
                    "symmetric": sym.symmetric,
                    "first_violation": sym.first_violation,
                    "checked": sym.checked,
                    "skipped": sym.skipped,
                    "valid": invalid.is_none(),
                    "invalid": invalid,
                    "values_in_invariant_subspace": f.values_invariant()?,
                }));
            }
            let artifact = json!({ "kind": "fj_check", "symmetric": all_symmetric, "series": reports });
            Ok((artifact, json!({ "series": all.len() })))
        }
        Command::Fj(FjCmd::Tensor { a, b, a_index, b_index }) => {
            let t = fj_tensor(&load_series(a, *a_index)?, &load_series(b, *b_index)?)?;
            Ok((val(&t), json!({ "weight": fmt_q64(&t.weight), "dim": t.rep.dim })))
        }
        Command::Fj(FjCmd::Pair { g, f, sigma, g_index, f_index }) => {
            let g = load_series(g, *g_index)?;
            let f = load_series(f, *f_index)?;
            let sigma = match sigma {
                Some(s) => load_rep(s)?,
                None => {
                    if f.rep.dim == 0 || g.rep.dim % f.rep.dim != 0 {
                        return Err(fj_core::Error::IncompatibleShapes("Hom dimension not a multiple".into()).into());
                    }
                    rep_trivial_dim(g.rep.dim / f.rep.dim)
                }
            };
            let p = fj_pair(&g, &f, &sigma)?;
            Ok((val(&p), json!({ "weight": fmt_q64(&p.weight), "dim": p.rep.dim })))
        }
        Command::Fj(FjCmd::Invert { series }) => {
            let inv = fj_invert(&load_series(&series.path, series.index)?)?;
            Ok((val(&inv), windows(&inv)))
        }
        Command::Fj(FjCmd::Quotient { g, h, g_index, h_index }) => {
            let q = fj_meromorphic_expansion(&load_series(g, *g_index)?, &load_series(h, *h_index)?)?;
            Ok((val(&q), windows(&q)))
        }
        Command::Siegel(SiegelCmd::Solve { k, m, n, rep, stabilize, max_escalations }) => {
            let kq = parse_q64(k)?;
            let rho = load_rep(rep)?;
            let opts = SolveOptions { stabilize: *stabilize, max_escalations: *max_escalations };
            let space = SymmetricSolver::new().solve(&kq, &rho, *m, *n, opts)?;
            let expected = if rho.dim == 1 && rho.is_trivial() && kq.is_integer() {
                expected_dimension(kq.to_integer()).ok()
            } else {
                None
            };
            let artifact = json!({
                "kind": "symmetric_space",
                "k": fmt_q64(&kq),
                "rep": rep,
                "M": space.m_trunc,
                "N": space.qprec,
                "dimension": space.dimension,
                "expected_dimension": expected,
                "basis": space.basis,
            });
            let extra = json!({
                "requested": { "M": m, "N": n },
                "stabilized_at": { "M": space.m_trunc, "N": space.qprec },
                "trail": space.trail,
                "matrix": { "rows": space.rows, "cols": space.cols },
                "dimension": space.dimension,
            });
            Ok((artifact, extra))
        }
        Command::Siegel(SiegelCmd::Dims { max_k, solve, m, n }) => {
            let solver = SymmetricSolver::new();
            let trivial = rep_trivial_dim(1);
            let mut rows = Vec::new();
            let mut agree = true;
            for k in (0..=*max_k).step_by(2) {
                let expected = expected_dimension(k)?;
                let mut row = json!({ "k": k, "expected": expected });
                if *solve {
                    let s = solver.solve(&k.into(), &trivial, *m, *n, SolveOptions::default())?;
                    agree &= s.dimension == expected;
                    row["solved"] = json!(s.dimension);
                }
                rows.push(row);
            }
            let mut artifact = json!({ "kind": "siegel_dims", "max_k": max_k, "dims": rows });
            if *solve {
                artifact["M"] = json!(m);
                artifact["N"] = json!(n);
                artifact["agree"] = json!(agree);
            }
            Ok((artifact, json!({ "solved": solve })))
        }
        Command::Siegel(SiegelCmd::Table { series }) => {
            let t = fj_to_siegel(&load_series(&series.path, series.index)?)?;
            Ok((val(&t), json!({ "entries": t.coeffs().len() })))
        }
        Command::Lattice(LatticeCmd::Disc { gram }) => {
            let text = String::from_utf8_lossy(&read(gram)?).into_owned();
            let l = EvenLattice::parse(&text)?;
            let d = discriminant_form(&l)?;
            let extra = json!({ "order": d.order(), "signature": [l.signature.0, l.signature.1], "rank": l.rank() });
            Ok((val(&d), extra))
        }
        Command::Weil(WeilCmd::Genus1 { disc }) => {
            let d = load_disc(disc)?;
            Ok((val(&weil_rep_genus1(&d)), json!({ "order": d.order() })))
        }
        Command::Weil(WeilCmd::Genus2 { disc, delta_root }) => {
            let d = load_disc(disc)?;
            let rho = weil_rep_genus2(&d, *delta_root);
            let report = verify_representation(&rho);
            Ok((val(&rho), json!({ "order": d.order(), "violations": report.violations })))
        }
    }
}

fn windows(s: &fj_core::fjseries::MeromorphicFJSeries) -> Value {
    let w: Vec<Value> = (0..=s.m_trunc)
        .map(|m| {
            let (lo, hi) = s.window(m);
            json!([fmt_q64(&lo), fmt_q64(&hi)])
        })
        .collect();
    json!({ "windows": w })
}
