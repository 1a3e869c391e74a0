//! Run configuration: flat `key = value` text, with command-line flags
//! layered on top.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use wavecorr::{FailurePolicy, ReturnKind, ScaleLabel, SyntheticModel, SyntheticSpec};

/// Every key the config file accepts.
pub const KEYS: &[&str] = &[
    "input",
    "input_kind",
    "synthetic",
    "assets",
    "obs",
    "rho",
    "tick_prob",
    "vol",
    "seed",
    "returns",
    "filter",
    "levels",
    "window",
    "window_start",
    "stride",
    "min_unbiased",
    "scales",
    "sdu_reference",
    "eigen_ranks",
    "upper",
    "lower",
    "weights",
    "mu",
    "vols",
    "targets",
    "n_targets",
    "on_failure",
    "delimiter",
    "forward_fill",
    "out",
];

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

type Res<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Res<T> {
    Err(ConfigError(msg.into()))
}

/// Raw settings before typing; later inserts win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    pub fn parse(text: &str) -> Res<Settings> {
        let mut map = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("config line {}: expected key = value", no + 1));
            };
            let key = k.trim().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                return err(format!("config line {}: unknown key {key:?}", no + 1));
            }
            map.insert(key, v.trim().to_string());
        }
        Ok(Settings(map))
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        debug_assert!(KEYS.contains(&key), "{key}");
        self.0.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    /// Canonical text form: sorted keys, one per line.
    pub fn to_text(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn without(&self, key: &str) -> Settings {
        let mut s = self.clone();
        s.0.remove(key);
        s
    }

    fn typed<T: FromStr>(&self, key: &str) -> Res<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| ConfigError(format!("{key}: cannot parse {v:?}: {e}")))
            })
            .transpose()
    }

    fn list<T: FromStr>(&self, key: &str) -> Res<Option<Vec<T>>>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<T>()
                            .map_err(|e| ConfigError(format!("{key}: cannot parse {s:?}: {e}")))
                    })
                    .collect()
            })
            .transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Prices,
    Returns,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    File { path: PathBuf, kind: InputKind },
    Synthetic(SyntheticSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: Source,
    pub return_kind: ReturnKind,
    pub filter: String,
    /// `None` picks the deepest level allowed, capped at 6.
    pub levels: Option<usize>,
    pub window: Option<usize>,
    pub window_start: usize,
    pub stride: Option<usize>,
    pub min_unbiased: usize,
    pub scales: Option<Vec<ScaleLabel>>,
    /// Window-index range for the SDU reference statistics.
    pub sdu_reference: Option<(usize, usize)>,
    /// 1 is the largest eigenvalue, 2 the second largest, and so on.
    pub eigen_ranks: Vec<usize>,
    pub upper: f64,
    pub lower: f64,
    pub weights: Option<Vec<f64>>,
    pub mu: Option<Vec<f64>>,
    pub vols: Option<Vec<f64>>,
    pub targets: Option<Vec<f64>>,
    pub n_targets: usize,
    pub on_failure: FailurePolicy,
    pub delimiter: u8,
    pub forward_fill: bool,
    pub out: PathBuf,
    pub seed: u64,
}

fn parse_kind(s: &str) -> Res<InputKind> {
    match s.to_ascii_lowercase().as_str() {
        "prices" | "price" => Ok(InputKind::Prices),
        "returns" | "return" => Ok(InputKind::Returns),
        other => err(format!("input_kind must be prices or returns, got {other:?}")),
    }
}

fn parse_policy(s: &str) -> Res<FailurePolicy> {
    match s.to_ascii_lowercase().as_str() {
        "abort" => Ok(FailurePolicy::Abort),
        "skip" | "skip-and-flag" | "skip_and_flag" => Ok(FailurePolicy::SkipAndFlag),
        other => err(format!("on_failure must be abort or skip, got {other:?}")),
    }
}

fn parse_range(s: &str) -> Res<(usize, usize)> {
    let parsed = s
        .split_once(':')
        .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
    match parsed {
        Some((a, b)) if a < b => Ok((a, b)),
        _ => err(format!("sdu_reference must be start:end with start < end, got {s:?}")),
    }
}

impl RunConfig {
    pub fn from_settings(s: &Settings) -> Res<RunConfig> {
        let seed = s.typed::<u64>("seed")?.unwrap_or(0);
        let source = match (s.get("input"), s.get("synthetic")) {
            (Some(_), Some(_)) => return err("give either input or synthetic, not both"),
            (None, None) => return err("no data: give input = <csv> or synthetic = <model>"),
            (Some(path), None) => Source::File {
                path: PathBuf::from(path),
                kind: s.get("input_kind").map_or(Ok(InputKind::Prices), parse_kind)?,
            },
            (None, Some(model)) => {
                let model: SyntheticModel =
                    model.parse().map_err(|e| ConfigError(format!("synthetic: {e}")))?;
                let n = s.typed::<usize>("assets")?.unwrap_or(10);
                let t = s.typed::<usize>("obs")?.unwrap_or(1000);
                let mut spec = SyntheticSpec::new(model, n, t, seed);
                if let Some(r) = s.typed("rho")? {
                    spec = spec.with_rho(r);
                }
                if let Some(p) = s.typed("tick_prob")? {
                    spec = spec.with_tick_prob(p);
                }
                if let Some(v) = s.typed("vol")? {
                    spec = spec.with_vol(v);
                }
                spec.validate().map_err(|e| ConfigError(e.to_string()))?;
                Source::Synthetic(spec)
            }
        };
        let delimiter = match s.get("delimiter") {
            None => b',',
            Some("tab") | Some("\\t") => b'\t',
            Some(d) if d.len() == 1 => d.as_bytes()[0],
            Some(d) => return err(format!("delimiter must be one character or tab, got {d:?}")),
        };
        let cfg = RunConfig {
            source,
            return_kind: s
                .get("returns")
                .map(|v| v.parse::<ReturnKind>().map_err(|e| ConfigError(e.to_string())))
                .transpose()?
                .unwrap_or_default(),
            filter: s.get("filter").unwrap_or("la8").to_ascii_lowercase(),
            levels: s.typed("levels")?,
            window: s.typed("window")?,
            window_start: s.typed("window_start")?.unwrap_or(0),
            stride: s.typed("stride")?,
            min_unbiased: s.typed("min_unbiased")?.unwrap_or(wavecorr::windows::DEFAULT_MIN_UNBIASED),
            scales: s.list::<ScaleLabel>("scales")?,
            sdu_reference: s.get("sdu_reference").map(parse_range).transpose()?,
            eigen_ranks: s.list("eigen_ranks")?.unwrap_or_else(|| vec![1]),
            upper: s.typed("upper")?.unwrap_or(1.0),
            lower: s.typed("lower")?.unwrap_or(-1.0),
            weights: s.list("weights")?,
            mu: s.list("mu")?,
            vols: s.list("vols")?,
            targets: s.list("targets")?,
            n_targets: s.typed("n_targets")?.unwrap_or(21),
            on_failure: s.get("on_failure").map_or(Ok(FailurePolicy::Abort), parse_policy)?,
            delimiter,
            forward_fill: s.typed("forward_fill")?.unwrap_or(false),
            out: PathBuf::from(s.get("out").unwrap_or("out")),
            seed,
        };
        cfg.check()?;
        Ok(cfg)
    }

    // Checks that need no data.
    fn check(&self) -> Res<()> {
        if self.levels == Some(0) {
            return err("levels must be at least 1");
        }
        if matches!(self.window, Some(w) if w < 2) {
            return err("window must be at least 2");
        }
        if self.stride == Some(0) {
            return err("stride must be at least 1");
        }
        if self.min_unbiased == 0 {
            return err("min_unbiased must be at least 1");
        }
        if self.eigen_ranks.is_empty() || self.eigen_ranks.contains(&0) {
            return err("eigen_ranks must list ranks >= 1 (1 = largest eigenvalue)");
        }
        if !(self.lower < self.upper) {
            return err(format!("lower ({}) must be below upper ({})", self.lower, self.upper));
        }
        if self.targets.is_none() && self.n_targets < 2 {
            return err("n_targets must be at least 2");
        }
        if matches!(&self.scales, Some(s) if s.is_empty()) {
            return err("scales is empty");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_dashes() {
        let s = Settings::parse("# run\nsynthetic = one-factor\nrho=0.3 # shared\ntick-prob = 0.5\n\n")
            .unwrap();
        assert_eq!(s.get("rho"), Some("0.3"));
        assert_eq!(s.get("tick_prob"), Some("0.5"));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        assert!(Settings::parse("colour = red").is_err());
        assert!(Settings::parse("levels 3").is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut s = Settings::parse("synthetic = iid-gaussian\nlevels = 3\nscales = raw,1,2").unwrap();
        s.set("seed", "9");
        let back = Settings::parse(&s.to_text()).unwrap();
        assert_eq!(back, s);
        let cfg = RunConfig::from_settings(&back).unwrap();
        assert_eq!(cfg.levels, Some(3));
        assert_eq!(cfg.seed, 9);
        assert_eq!(
            cfg.scales,
            Some(vec![ScaleLabel::Raw, ScaleLabel::Level(1), ScaleLabel::Level(2)])
        );
    }

    #[test]
    fn needs_exactly_one_source() {
        assert!(RunConfig::from_settings(&Settings::default()).is_err());
        let s = Settings::parse("input = a.csv\nsynthetic = iid-gaussian").unwrap();
        assert!(RunConfig::from_settings(&s).is_err());
    }

    #[test]
    fn rejects_inconsistent_values() {
        for bad in [
            "levels = 0",
            "stride = 0",
            "window = 1",
            "lower = 2",
            "eigen_ranks = 0",
            "on_failure = retry",
            "sdu_reference = 5:2",
            "rho = 1.5",
        ] {
            let s = Settings::parse(&format!("synthetic = equicorrelated\n{bad}")).unwrap();
            assert!(RunConfig::from_settings(&s).is_err(), "{bad}");
        }
    }
}
