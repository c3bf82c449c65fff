use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::ExperimentSpec;
use super::output::{complex15, write_csv, write_json, write_jsonl};
use crate::engine::verify::{
    beta_grid, verify_decay, verify_derivative_bound, verify_group_invariance, verify_holomorphy, verify_partition,
    verify_punctured_disk, verify_rate,
};
use crate::engine::{DistributionHandle, EvaluationTrace, GammaSampler};
use crate::error::{Error, Result};
use crate::projective::{Quadruple, SpherePoint, C64};

pub const ADDITIVITY_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_DERIVATIVE_RADIUS: f64 = 0.5;
pub const DEFAULT_HOLOMORPHY_RADIUS: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Check {
    Decay,
    Derivative,
    Rate,
    Holomorphy,
    PuncturedDisk,
    Partition,
    Invariance,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Decay => "decay",
            Check::Derivative => "derivative",
            Check::Rate => "rate",
            Check::Holomorphy => "holomorphy",
            Check::PuncturedDisk => "punctured-disk",
            Check::Partition => "partition",
            Check::Invariance => "invariance",
        }
    }
}

/// Where a command writes and what it was asked.
pub struct Run {
    pub spec: ExperimentSpec,
    pub out: PathBuf,
    pub seed: u64,
}

impl Run {
    fn path(&self, name: &str) -> PathBuf {
        let p = Path::new(name);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.out.join(p)
        }
    }

    fn csv_path(&self, command: &str) -> PathBuf {
        self.path(self.spec.output.csv.as_deref().unwrap_or(&format!("{command}.csv")))
    }

    fn finish<T: Serialize>(&self, command: &str, rows: &[T], pass: bool, worst_margin: f64, extra: serde_json::Value) -> Result<bool> {
        write_csv(&self.csv_path(command), rows)?;
        let mut summary = json!({
            "command": command,
            "pass": pass,
            "worst_margin": finite_or_null(worst_margin),
            "samples": rows.len(),
        });
        if let (Some(s), serde_json::Value::Object(e)) = (summary.as_object_mut(), extra) {
            s.extend(e);
        }
        write_json(&self.path(&self.spec.output.summary), &summary)?;
        Ok(pass)
    }
}

fn finite_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        serde_json::Value::Null
    }
}

/// `cr` and its principal logarithm, comma separated.
pub fn cr_line(args: &[String]) -> Result<String> {
    let pts: Vec<SpherePoint> = args.iter().map(|a| a.parse()).collect::<Result<_>>()?;
    let [a, b, c, d]: [SpherePoint; 4] =
        pts.try_into().map_err(|_| Error::Config("cr takes exactly four points".into()))?;
    let q = Quadruple::new(a, b, c, d)?;
    Ok(format!("{}, {}", complex15(q.cross_ratio()), complex15(q.log_cross_ratio())))
}

pub fn verify(run: &Run, check: Check) -> Result<bool> {
    let spec = &run.spec;
    let name = check.name();
    match check {
        Check::Decay => {
            let fam = spec.family()?;
            let rep = verify_decay(&fam, &spec.family.ts, &spec.quadruple_source(), spec.params.eps)?;
            let extra = json!({ "violations": rep.violations, "fits": rep.fits });
            run.finish(name, &rep.samples, rep.pass, rep.worst_margin, extra)
        }
        Check::Derivative => {
            let fam = spec.family()?;
            let r = spec.verify.radius.unwrap_or(DEFAULT_DERIVATIVE_RADIUS);
            let rep = verify_derivative_bound(&fam, r, &spec.quadruple_source(), spec.params.eps)?;
            let extra = json!({
                "violations": rep.violations,
                "k_r": rep.k_r,
                "max_calibration_ratio": rep.max_calibration_ratio,
                "c_fit": rep.c_fit,
            });
            run.finish(name, &rep.samples, rep.pass, rep.worst_margin, extra)
        }
        Check::Rate => {
            #[derive(Serialize)]
            struct Row {
                n: u32,
                delta: f64,
                log4_delta: f64,
            }
            let xi = spec.xi()?;
            let v = &spec.verify;
            let rep = verify_rate(&xi, &spec.deformation(0)?, v.first_level, v.last_level, spec.params.guard)?;
            let rows: Vec<Row> =
                rep.deltas.iter().map(|&(n, d)| Row { n, delta: d, log4_delta: d.ln() / 4f64.ln() }).collect();
            let extra = json!({ "slope": finite_or_null(rep.slope), "bound": rep.bound, "omega": rep.omega });
            run.finish(name, &rows, rep.pass, rep.bound - rep.slope, extra)
        }
        Check::Holomorphy => {
            let xi = spec.xi()?;
            let fam = spec.family()?;
            let v = &spec.verify;
            let r = v.radius.unwrap_or(DEFAULT_HOLOMORPHY_RADIUS);
            let rep = verify_holomorphy(&xi, &fam, v.t0, r, v.points, &spec.params)?;
            let worst = rep.threshold - rep.mean_value_residual.max(rep.dbar_residual);
            let extra = json!({
                "f_center": [rep.f_center.re, rep.f_center.im],
                "mean_value_residual": rep.mean_value_residual,
                "dbar_residual": rep.dbar_residual,
                "derivative": [rep.derivative.re, rep.derivative.im],
                "derivative_fd": [rep.derivative_fd.re, rep.derivative_fd.im],
                "derivative_rel_error": rep.derivative_rel_error,
                "threshold": rep.threshold,
            });
            run.finish(name, &rep.circle, rep.pass, worst, extra)
        }
        Check::PuncturedDisk => {
            let rep = verify_punctured_disk(&beta_grid(), spec.verify.per_beta, spec.verify.seed)?;
            let extra = json!({ "violations": rep.violations });
            run.finish(name, &rep.samples, rep.pass, rep.worst_margin, extra)
        }
        Check::Partition => {
            let v = &spec.verify;
            let rep = verify_partition(v.boxes, v.levels, v.seed, ADDITIVITY_TOLERANCE)?;
            let extra = json!({ "worst_additivity": rep.worst_additivity, "additivity_tolerance": rep.additivity_tolerance });
            run.finish(name, &rep.samples, rep.pass, rep.worst_margin, extra)
        }
        Check::Invariance => {
            #[derive(Serialize)]
            struct Row {
                t_re: f64,
                t_im: f64,
                w_re: f64,
                w_im: f64,
                w_moved_re: f64,
                w_moved_im: f64,
                difference: f64,
                bound: f64,
                margin: f64,
            }
            let group = spec.group()?.ok_or_else(|| Error::Config("invariance needs a [group] section".into()))?;
            let xi = spec.xi()?;
            let mut rows = Vec::new();
            for (k, &t) in spec.family.ts.iter().enumerate() {
                let handle = DistributionHandle::new(spec.deformation(k)?, Some(group), spec.params)?;
                let rep = verify_group_invariance(&handle, &xi, &group.generator())?;
                rows.push(Row {
                    t_re: t.re,
                    t_im: t.im,
                    w_re: rep.w.re,
                    w_im: rep.w.im,
                    w_moved_re: rep.w_moved.re,
                    w_moved_im: rep.w_moved.im,
                    difference: rep.difference,
                    bound: rep.bound,
                    margin: rep.bound - rep.difference,
                });
            }
            let pass = rows.iter().all(|r| r.margin >= 0.0);
            let worst = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
            run.finish(name, &rows, pass, worst, json!({}))
        }
    }
}

#[derive(Serialize)]
struct EvalRow {
    t_re: f64,
    t_im: f64,
    gamma: String,
    p: f64,
    q: f64,
    r: f64,
    value_re: f64,
    value_im: f64,
    abs: f64,
    levels: u32,
    delta_last: f64,
    status: String,
}

#[derive(Serialize)]
struct TraceLine {
    t_index: usize,
    gamma: usize,
    n: u32,
    #[serde(rename = "I_re")]
    i_re: f64,
    #[serde(rename = "I_im")]
    i_im: f64,
    delta: Option<f64>,
}

enum Outcome {
    Value(C64, EvaluationTrace),
    NotConverged(EvaluationTrace),
    Outside(String),
}

/// `W(ξ∘γ)` over the sampler for each listed parameter. Returns the exit
/// status: 0 all converged, 1 some evaluation did not, 3 some left the
/// admissible neighborhood.
pub fn eval(run: &Run) -> Result<i32> {
    let spec = &run.spec;
    let xi = spec.xi()?;
    let sampler = GammaSampler::new(spec.gamma_resolution)?;
    let samples = sampler.samples();
    let handles = (0..spec.family.ts.len())
        .map(|k| DistributionHandle::new(spec.deformation(k)?, spec.group()?, spec.params))
        .collect::<Result<Vec<_>>>()?;
    for h in &handles {
        h.check_support(&xi)?;
    }
    let mut work: Vec<(usize, usize)> =
        (0..handles.len()).flat_map(|k| (0..samples.len()).map(move |g| (k, g))).collect();
    work.shuffle(&mut ChaCha8Rng::seed_from_u64(run.seed));
    let mut done: Vec<((usize, usize), Result<Outcome>)> = work
        .par_iter()
        .map(|&(k, g)| {
            let r = match handles[k].evaluate(&xi, &samples[g].transform) {
                Ok((v, tr)) => Ok(Outcome::Value(v, tr)),
                Err(Error::ToleranceNotReached(tr)) => Ok(Outcome::NotConverged(*tr)),
                Err(e @ (Error::OutsideNeighborhood(_) | Error::BranchViolation { .. })) => Ok(Outcome::Outside(e.to_string())),
                Err(e) => Err(e),
            };
            ((k, g), r)
        })
        .collect();
    done.sort_by_key(|(key, _)| *key);

    let mut rows = Vec::new();
    let mut trace = Vec::new();
    let mut seminorms = Vec::new();
    let (mut not_converged, mut outside) = (0usize, 0usize);
    let mut it = done.into_iter().peekable();
    for (k, &t) in spec.family.ts.iter().enumerate() {
        let mut sup: f64 = 0.0;
        while let Some(((kk, g), _)) = it.peek() {
            if *kk != k {
                break;
            }
            let g = *g;
            let (_, res) = it.next().expect("peeked");
            let s = &samples[g];
            let mut row = EvalRow {
                t_re: t.re,
                t_im: t.im,
                gamma: g.to_string(),
                p: s.angles[0],
                q: s.angles[1],
                r: s.angles[2],
                value_re: f64::NAN,
                value_im: f64::NAN,
                abs: f64::NAN,
                levels: 0,
                delta_last: f64::NAN,
                status: String::new(),
            };
            let tr = match res? {
                Outcome::Value(v, tr) => {
                    (row.value_re, row.value_im, row.abs) = (v.re, v.im, v.norm());
                    sup = sup.max(v.norm());
                    row.status = "ok".into();
                    Some(tr)
                }
                Outcome::NotConverged(tr) => {
                    not_converged += 1;
                    row.status = "not-converged".into();
                    Some(tr)
                }
                Outcome::Outside(msg) => {
                    outside += 1;
                    row.status = format!("outside: {msg}");
                    None
                }
            };
            if let Some(tr) = tr {
                row.levels = tr.last_level();
                row.delta_last = tr.last_delta();
                for (n, v, d) in tr.rows() {
                    trace.push(TraceLine {
                        t_index: k,
                        gamma: g,
                        n,
                        i_re: v.re,
                        i_im: v.im,
                        delta: d.is_finite().then_some(d),
                    });
                }
            }
            rows.push(row);
        }
        seminorms.push(sup);
        rows.push(EvalRow {
            t_re: t.re,
            t_im: t.im,
            gamma: "seminorm".into(),
            p: f64::NAN,
            q: f64::NAN,
            r: f64::NAN,
            value_re: sup,
            value_im: 0.0,
            abs: sup,
            levels: 0,
            delta_last: f64::NAN,
            status: "sup".into(),
        });
    }
    write_csv(&run.csv_path("eval"), &rows)?;
    write_jsonl(&run.path(&spec.output.trace), &trace)?;
    let pass = not_converged == 0 && outside == 0;
    write_json(
        &run.path(&spec.output.summary),
        &json!({
            "command": "eval",
            "pass": pass,
            "samples": samples.len() * handles.len(),
            "seminorm": seminorms,
            "not_converged": not_converged,
            "outside": outside,
            "resolution": spec.gamma_resolution,
        }),
    )?;
    Ok(if outside > 0 {
        3
    } else if not_converged > 0 {
        1
    } else {
        0
    })
}
