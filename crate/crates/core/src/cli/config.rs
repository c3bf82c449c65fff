//! `key = value` experiment files with `[section]` headers.
//!
//! `#` starts a comment. Unknown sections and keys are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use crate::engine::verify::{QuadrupleSource, DEFAULT_SEED};
use crate::engine::{Deformation, EvalParams};
use crate::error::{Error, Result};
use crate::families::{CyclicFuchsianGroup, HolomorphicQCFamily};
use crate::holder::HolderFunction;
use crate::projective::{parse_complex, GeodesicBox, SpherePoint, C64};

const SECTIONS: &[(&str, &[&str])] = &[
    ("family", &["kind", "r0", "t"]),
    ("group", &["multiplier"]),
    ("xi", &["kind", "box", "lambda", "rows", "cols", "table"]),
    ("gamma", &["resolution"]),
    ("params", &["tolerance", "n_max", "lambda", "eps", "guard", "acceleration"]),
    (
        "verify",
        &[
            "samples", "s_min", "s_max", "complex", "seed", "radius", "t0", "points", "boxes", "levels",
            "per_beta", "first_level", "last_level",
        ],
    ),
    ("output", &["csv", "summary", "trace"]),
];

type Raw = BTreeMap<String, BTreeMap<String, String>>;

fn parse_raw(text: &str) -> Result<Raw> {
    let mut raw: Raw = BTreeMap::new();
    let mut section: Option<String> = None;
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |msg: String| Error::Config(format!("line {}: {msg}", k + 1));
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                return Err(at(format!("unknown section [{name}]")));
            }
            if raw.contains_key(&name) {
                return Err(at(format!("section [{name}] repeated")));
            }
            raw.insert(name.clone(), BTreeMap::new());
            section = Some(name);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| at(format!("expected key = value, got `{line}`")))?;
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        let sec = section.as_ref().ok_or_else(|| at(format!("key `{key}` outside a section")))?;
        let allowed = SECTIONS.iter().find(|(s, _)| s == sec).map(|(_, keys)| *keys).unwrap_or(&[]);
        if !allowed.contains(&key.as_str()) {
            return Err(at(format!("unknown key `{key}` in [{sec}]")));
        }
        let entries = raw.get_mut(sec).expect("section inserted");
        if entries.insert(key.clone(), value).is_some() {
            return Err(at(format!("key `{key}` repeated in [{sec}]")));
        }
    }
    Ok(raw)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyChoice {
    Identity,
    Power,
    Vertical,
    /// Power stretch after vertical stretch.
    PowerVertical,
}

#[derive(Clone, Debug)]
pub struct FamilySpec {
    pub kind: FamilyChoice,
    pub r0: f64,
    pub ts: Vec<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XiKind {
    Bump,
    Product,
    Indicator,
    Table,
}

#[derive(Clone, Debug)]
pub struct XiSpec {
    pub kind: XiKind,
    pub corners: [SpherePoint; 4],
    pub lambda: f64,
    pub rows: usize,
    pub cols: usize,
    pub table: Vec<C64>,
}

#[derive(Clone, Debug)]
pub struct VerifySpec {
    pub samples: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub complex: bool,
    pub seed: u64,
    pub radius: Option<f64>,
    pub t0: C64,
    pub points: usize,
    pub boxes: usize,
    pub levels: u32,
    pub per_beta: usize,
    pub first_level: u32,
    pub last_level: u32,
}

#[derive(Clone, Debug)]
pub struct OutputSpec {
    pub csv: Option<String>,
    pub summary: String,
    pub trace: String,
}

/// A parsed and range-checked experiment file.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub family: FamilySpec,
    pub group: Option<f64>,
    pub xi: Option<XiSpec>,
    pub gamma_resolution: usize,
    pub params: EvalParams,
    pub verify: VerifySpec,
    pub output: OutputSpec,
}

struct Section<'a> {
    name: &'a str,
    map: Option<&'a BTreeMap<String, String>>,
}

impl Section<'_> {
    fn get(&self, key: &str) -> Option<&str> {
        self.map.and_then(|m| m.get(key)).map(String::as_str)
    }

    fn err(&self, key: &str, msg: impl std::fmt::Display) -> Error {
        Error::Config(format!("[{}] {key}: {msg}", self.name))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse::<T>().map_err(|e| self.err(key, e)),
        }
    }

    fn parse_opt<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key).map(|v| v.parse::<T>().map_err(|e| self.err(key, e))).transpose()
    }

    fn complex_list(&self, key: &str) -> Result<Option<Vec<C64>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| parse_complex(s.trim()).map_err(|e| self.err(key, e)))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()
    }
}

impl ExperimentSpec {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw = parse_raw(text)?;
        let sec = |name: &'static str| Section { name, map: raw.get(name) };

        let fam = sec("family");
        let kind = match fam.get("kind").unwrap_or("identity") {
            "identity" => FamilyChoice::Identity,
            "power" => FamilyChoice::Power,
            "vertical" => FamilyChoice::Vertical,
            "power+vertical" => FamilyChoice::PowerVertical,
            other => return Err(fam.err("kind", format!("unknown family `{other}`"))),
        };
        let family = FamilySpec {
            kind,
            r0: fam.parse("r0", 1.0)?,
            ts: fam.complex_list("t")?.unwrap_or_else(|| vec![C64::new(0.0, 0.0)]),
        };
        if family.ts.is_empty() {
            return Err(fam.err("t", "empty list"));
        }

        let group = sec("group").parse_opt::<f64>("multiplier")?;

        let xs = sec("xi");
        let xi = match xs.map {
            None => None,
            Some(_) => {
                let kind = match xs.get("kind").unwrap_or("bump") {
                    "bump" => XiKind::Bump,
                    "product" => XiKind::Product,
                    "indicator" => XiKind::Indicator,
                    "custom-table" | "table" => XiKind::Table,
                    other => return Err(xs.err("kind", format!("unknown test function `{other}`"))),
                };
                let corners_text = xs.get("box").ok_or_else(|| xs.err("box", "missing"))?;
                let corners: Vec<SpherePoint> = corners_text
                    .split(',')
                    .map(|s| s.trim().parse::<SpherePoint>().map_err(|e| xs.err("box", e)))
                    .collect::<Result<_>>()?;
                let corners: [SpherePoint; 4] =
                    corners.try_into().map_err(|_| xs.err("box", "expected four corners a, b, c, d"))?;
                Some(XiSpec {
                    kind,
                    corners,
                    lambda: xs.parse("lambda", 1.0)?,
                    rows: xs.parse("rows", 0usize)?,
                    cols: xs.parse("cols", 0usize)?,
                    table: xs.complex_list("table")?.unwrap_or_default(),
                })
            }
        };

        let gamma_resolution = sec("gamma").parse("resolution", 4usize)?;

        let ps = sec("params");
        let d = EvalParams::default();
        let acceleration = match ps.get("acceleration").unwrap_or("richardson") {
            "richardson" => crate::engine::Acceleration::Richardson,
            "none" => crate::engine::Acceleration::None,
            other => return Err(ps.err("acceleration", format!("unknown `{other}`"))),
        };
        let params = EvalParams {
            tolerance: ps.parse("tolerance", d.tolerance)?,
            n_max: ps.parse("n_max", d.n_max)?,
            lambda: ps.parse("lambda", d.lambda)?,
            eps: ps.parse("eps", d.eps)?,
            guard: ps.parse("guard", d.guard)?,
            acceleration,
        };
        if !(params.tolerance > 0.0) || !(params.eps > 0.0) || !(params.guard > 0.0) {
            return Err(Error::Config("[params] tolerance, eps and guard must be positive".into()));
        }
        if !(params.lambda > 0.0 && params.lambda <= 1.0) {
            return Err(ps.err("lambda", "must lie in (0, 1]"));
        }

        let vs = sec("verify");
        let src = QuadrupleSource::default();
        let verify = VerifySpec {
            samples: vs.parse("samples", src.count)?,
            s_min: vs.parse("s_min", src.s_min)?,
            s_max: vs.parse("s_max", src.s_max)?,
            complex: vs.parse("complex", false)?,
            seed: vs.parse("seed", DEFAULT_SEED)?,
            radius: vs.parse_opt("radius")?,
            t0: vs.get("t0").map(parse_complex).transpose().map_err(|e| vs.err("t0", e))?.unwrap_or_default(),
            points: vs.parse("points", 16usize)?,
            boxes: vs.parse("boxes", 100usize)?,
            levels: vs.parse("levels", 6u32)?,
            per_beta: vs.parse("per_beta", 200usize)?,
            first_level: vs.parse("first_level", 2u32)?,
            last_level: vs.parse("last_level", 8u32)?,
        };

        let os = sec("output");
        let output = OutputSpec {
            csv: os.get("csv").map(str::to_string),
            summary: os.get("summary").unwrap_or("summary.json").to_string(),
            trace: os.get("trace").unwrap_or("trace.jsonl").to_string(),
        };

        let spec = ExperimentSpec { family, group, xi, gamma_resolution, params, verify, output };
        // surface range errors at load time
        let fam = spec.family()?;
        for &t in &spec.family.ts {
            fam.check_parameter(t).map_err(|e| Error::Config(format!("[family] t = {t}: {e}")))?;
        }
        if let Some(m) = spec.group {
            CyclicFuchsianGroup::new(m).map_err(|e| Error::Config(format!("[group] {e}")))?;
        }
        if spec.xi.is_some() {
            spec.xi()?;
        }
        Ok(spec)
    }

    pub fn family(&self) -> Result<HolomorphicQCFamily> {
        let r0 = self.family.r0;
        let wrap = |e: Error| Error::Config(format!("[family] {e}"));
        match self.family.kind {
            FamilyChoice::Identity => Ok(HolomorphicQCFamily::identity()),
            FamilyChoice::Power => HolomorphicQCFamily::power_stretch(r0).map_err(wrap),
            FamilyChoice::Vertical => HolomorphicQCFamily::vertical_stretch(r0).map_err(wrap),
            FamilyChoice::PowerVertical => HolomorphicQCFamily::composed(
                HolomorphicQCFamily::power_stretch(r0).map_err(wrap)?,
                HolomorphicQCFamily::vertical_stretch(r0).map_err(wrap)?,
            )
            .map_err(wrap),
        }
    }

    /// Deformation at the `k`-th listed parameter.
    pub fn deformation(&self, k: usize) -> Result<Deformation> {
        Ok(match self.family.kind {
            FamilyChoice::Identity => Deformation::Identity,
            _ => Deformation::Family { fam: self.family()?, t: self.family.ts[k] },
        })
    }

    pub fn group(&self) -> Result<Option<CyclicFuchsianGroup>> {
        self.group.map(CyclicFuchsianGroup::new).transpose()
    }

    pub fn xi(&self) -> Result<HolderFunction> {
        let x = self.xi.as_ref().ok_or_else(|| Error::Config("missing [xi] section".into()))?;
        let wrap = |e: Error| Error::Config(format!("[xi] {e}"));
        let [a, b, c, d] = x.corners;
        let support = GeodesicBox::new(a, b, c, d).map_err(wrap)?;
        match x.kind {
            XiKind::Bump => HolderFunction::bump(&support, x.lambda),
            XiKind::Product => HolderFunction::product(&support, x.lambda),
            XiKind::Indicator => Ok(HolderFunction::indicator(&support)),
            XiKind::Table => HolderFunction::table(&support, x.lambda, x.rows, x.cols, x.table.clone()),
        }
        .map_err(wrap)
    }

    pub fn quadruple_source(&self) -> QuadrupleSource {
        QuadrupleSource {
            count: self.verify.samples,
            s_min: self.verify.s_min,
            s_max: self.verify.s_max,
            complex: self.verify.complex,
            seed: self.verify.seed,
        }
    }
}
