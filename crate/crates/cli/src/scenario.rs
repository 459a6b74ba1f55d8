//! Scenario files: `key = value` lines under `[section]` headers, `#` comments.
//!
//! ```text
//! [parameters]
//! s = 0.5
//! q = 0.5
//! [measurement]
//! kind = spade
//! povm = projector_v
//! [run]
//! slots = 1000000
//! repetitions = 200
//! seed = 7
//! free = s
//! ```

use std::collections::HashMap;

use superres_core::measurement::{BinaryPovm, FreeParam, Measurement, PovmKind};
use superres_core::{Frame, OpticalConfig, Param, ParamPoint};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub point: ParamPoint,
    pub frame: Frame,
    pub cfg: OpticalConfig,
    pub measurement: Measurement,
    pub slots: u64,
    pub repetitions: u64,
    pub seed: u64,
    pub free: Vec<FreeParam>,
}

const KEYS: [(&str, &[&str]); 4] = [
    ("parameters", &["s", "q", "gamma_r", "gamma_i"]),
    ("optics", &["sigma", "delta", "alpha"]),
    ("measurement", &["kind", "povm"]),
    (
        "run",
        &[
            "slots",
            "repetitions",
            "seed",
            "free",
            "range.s",
            "range.q",
            "range.gamma_r",
            "range.gamma_i",
        ],
    ),
];

struct Entry {
    value: String,
    line: usize,
}

struct Parsed<'a> {
    path: &'a str,
    entries: HashMap<(String, String), Entry>,
    last_line: usize,
}

impl Parsed<'_> {
    fn err(&self, line: usize, message: impl Into<String>) -> CliError {
        CliError::Parse {
            path: self.path.to_string(),
            line,
            message: message.into(),
        }
    }

    fn raw(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn number<T: std::str::FromStr>(&self, section: &str, key: &str, default: Option<T>) -> CliResult<T> {
        match self.raw(section, key) {
            Some(e) => e
                .value
                .parse::<T>()
                .map_err(|_| self.err(e.line, format!("{section}.{key}: cannot parse '{}'", e.value))),
            None => default.ok_or_else(|| self.err(self.last_line, format!("missing required key {section}.{key}"))),
        }
    }

    fn line_of(&self, section: &str, key: &str) -> usize {
        self.raw(section, key).map_or(self.last_line, |e| e.line)
    }
}

fn tokenize<'a>(path: &'a str, text: &str) -> CliResult<Parsed<'a>> {
    let mut parsed = Parsed {
        path,
        entries: HashMap::new(),
        last_line: text.lines().count().max(1),
    };
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
            let name = name.trim();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                return Err(parsed.err(line, format!("unknown section [{name}]")));
            }
            section = Some(name.to_string());
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(parsed.err(line, format!("expected key = value, found '{body}'")));
        };
        let Some(sec) = &section else {
            return Err(parsed.err(line, "key outside of any [section]"));
        };
        let key = key.trim();
        let allowed = KEYS.iter().find(|(s, _)| s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(parsed.err(line, format!("unknown key '{key}' in [{sec}]")));
        }
        let slot = (sec.clone(), key.to_string());
        if parsed.entries.contains_key(&slot) {
            return Err(parsed.err(line, format!("duplicate key {sec}.{key}")));
        }
        parsed.entries.insert(
            slot,
            Entry {
                value: value.trim().to_string(),
                line,
            },
        );
    }
    Ok(parsed)
}

fn default_range(param: Param, sigma: f64) -> (f64, f64) {
    match param {
        Param::S => (1e-3 * sigma, 5.0 * sigma),
        Param::Q => (0.0, 1.0),
        Param::GammaR | Param::GammaI => (-1.0, 1.0),
    }
}

pub fn parse_scenario(path: &str, text: &str) -> CliResult<Scenario> {
    let sc = tokenize(path, text)?;
    let pline = sc.line_of("parameters", "s");
    let point = ParamPoint::new(
        sc.number("parameters", "s", None)?,
        sc.number("parameters", "q", None)?,
        sc.number("parameters", "gamma_r", Some(0.0))?,
        sc.number("parameters", "gamma_i", Some(0.0))?,
    )
    .map_err(|e| sc.err(pline, e.to_string()))?;

    let std = OpticalConfig::standard();
    let sigma = sc.number("optics", "sigma", Some(std.sigma))?;
    let delta = sc.number("optics", "delta", Some(std.delta))?;
    let frame = match sc.raw("optics", "alpha") {
        Some(e) => Frame::parse(&e.value).ok_or_else(|| {
            sc.err(
                e.line,
                format!(
                    "optics.alpha: expected geometric, centroid or a number, found '{}'",
                    e.value
                ),
            )
        })?,
        None => Frame::Geometric,
    };
    let cfg = OpticalConfig::new(sigma, delta, frame.alpha(&point))
        .map_err(|e| sc.err(sc.line_of("optics", "sigma"), e.to_string()))?;

    let kind = sc.raw("measurement", "kind").map_or("spade", |e| e.value.as_str());
    let measurement = match kind {
        "counting" => Measurement::Counting,
        "spade" => {
            let povm = sc
                .raw("measurement", "povm")
                .map_or("projector_v", |e| e.value.as_str());
            let k = PovmKind::parse(povm)
                .ok_or_else(|| sc.err(sc.line_of("measurement", "povm"), format!("unknown povm '{povm}'")))?;
            Measurement::Spade(BinaryPovm::new(k))
        }
        other => {
            return Err(sc.err(
                sc.line_of("measurement", "kind"),
                format!("measurement.kind: expected spade or counting, found '{other}'"),
            ))
        }
    };

    let slots: u64 = sc.number("run", "slots", None)?;
    if slots == 0 {
        return Err(sc.err(sc.line_of("run", "slots"), "run.slots must be positive"));
    }
    let repetitions: u64 = sc.number("run", "repetitions", Some(1))?;
    if repetitions == 0 {
        return Err(sc.err(sc.line_of("run", "repetitions"), "run.repetitions must be positive"));
    }
    let seed: u64 = sc.number("run", "seed", Some(0))?;

    let free_line = sc.line_of("run", "free");
    let names = sc.raw("run", "free").map_or("s", |e| e.value.as_str());
    let mut free = Vec::new();
    for name in names.split(',').map(str::trim).filter(|n| !n.is_empty()) {
        let param = Param::parse(name).ok_or_else(|| sc.err(free_line, format!("unknown parameter '{name}'")))?;
        let key = format!("range.{}", param.name());
        let (lo, hi) = match sc.raw("run", &key) {
            Some(e) => {
                let bounds: Vec<f64> = e
                    .value
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| sc.err(e.line, format!("run.{key}: expected 'lo, hi'")))?;
                match bounds[..] {
                    [lo, hi] if lo < hi => (lo, hi),
                    _ => return Err(sc.err(e.line, format!("run.{key}: expected 'lo, hi' with lo < hi"))),
                }
            }
            None => default_range(param, sigma),
        };
        free.push(FreeParam { param, lo, hi });
    }
    if free.is_empty() {
        return Err(sc.err(free_line, "run.free must name at least one parameter"));
    }
    Ok(Scenario {
        point,
        frame,
        cfg,
        measurement,
        slots,
        repetitions,
        seed,
        free,
    })
}

pub fn load_scenario(path: &std::path::Path) -> CliResult<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&path.display().to_string(), &text)
}
