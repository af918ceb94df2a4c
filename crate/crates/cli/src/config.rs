//! Run configuration: `key=value` files, positional `key=value` tokens and
//! `--key value` flags, merged in that order of increasing precedence.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use sievelab::feasibility::{Axis, Objective, Params};
use sievelab::modone::Irrational;
use sievelab::report::Format;
use sievelab::rosser::Sign;

/// Every recognised key with its help text.
pub const KEYS: &[(&str, &str)] = &[
    ("theta", "exponent θ of Δ = N^-θ"),
    ("eta", "exponent η of z = N^η"),
    ("rho", "exponent ρ of y = N^ρ"),
    ("delta", "exponent δ of D = N^δ"),
    ("kappa", "Chen weight κ"),
    ("n", "scale N"),
    (
        "alpha",
        "irrational: (a+b*sqrt(d))/c, sqrt2, sqrt3, golden or dec:<digits>",
    ),
    ("beta", "shift β"),
    ("out", "output path (stdout when omitted or -)"),
    ("format", "csv or json"),
    ("workers", "worker threads"),
    ("z", "sifting limit for rosser-verify"),
    ("level", "level D for rosser-verify (alias D)"),
    ("sign", "lower, upper or both"),
    (
        "sweep",
        "rosser-verify over every z and integer D up to the given ones",
    ),
    ("k", "Heath-Brown order, or a comma list such as 2,3"),
    ("x", "Heath-Brown cutoff x, or min-sum range X"),
    ("y", "min-sum range Y"),
    ("nmax", "largest n for hb-verify"),
    ("q", "convergent denominator Q"),
    ("count", "number of convergents for expsum-minsum"),
    ("objective", "max_sigma0_margin, max_theta or min_r"),
    ("theta_range", "lo:hi:step grid axis"),
    ("eta_range", "lo:hi:step grid axis"),
    ("rho_range", "lo:hi:step grid axis"),
    ("delta_range", "lo:hi:step grid axis"),
    ("kappa_range", "lo:hi:step grid axis"),
    ("debug_chi", "replace χ by the constant 1"),
    ("records", "emit per-prime records (csv) with scan"),
    ("use_gamma_weights", "ξ(d) = λ*(d) − κγ(d) in expsum-ssum"),
];

/// Keys that may appear as bare flags.
pub const BOOL_KEYS: &[&str] = &["sweep", "debug_chi", "records", "use_gamma_weights"];

const ALIASES: &[(&str, &str)] = &[("D", "level"), ("N", "n")];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    FeasCheck,
    FeasOptimize,
    Scan,
    RosserVerify,
    HbVerify,
    ExpsumSsum,
    ExpsumMinsum,
    ChiInspect,
}

impl Command {
    pub const ALL: [(&'static str, Command); 8] = [
        ("feas-check", Command::FeasCheck),
        ("feas-optimize", Command::FeasOptimize),
        ("scan", Command::Scan),
        ("rosser-verify", Command::RosserVerify),
        ("hb-verify", Command::HbVerify),
        ("expsum-ssum", Command::ExpsumSsum),
        ("expsum-minsum", Command::ExpsumMinsum),
        ("chi-inspect", Command::ChiInspect),
    ];

    /// Accepts `feas-check` as well as the split form `feas check`.
    pub fn parse(tokens: &[String]) -> Result<Self, String> {
        let joined = tokens.join("-");
        Self::ALL
            .iter()
            .find(|(name, _)| *name == joined)
            .map(|&(_, c)| c)
            .ok_or_else(|| format!("unknown command {joined:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub Vec<String>);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "error: {e}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GridSpec {
    /// `theta, eta, rho, delta, kappa`; `None` means "around the given value".
    pub axes: [Option<Axis>; 5],
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub params: Params,
    pub n: Option<f64>,
    pub alpha: Irrational,
    pub beta: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub workers: usize,
    pub z: f64,
    pub level: f64,
    pub signs: Vec<Sign>,
    pub sweep: bool,
    pub k: Vec<u32>,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub nmax: u64,
    pub q: Option<i128>,
    pub count: usize,
    pub objective: Objective,
    pub grid: GridSpec,
    pub debug_chi: bool,
    pub records: bool,
    pub use_gamma_weights: bool,
}

/// Canonical key for `raw`, resolving aliases; `None` when unknown.
pub fn canonical_key(raw: &str) -> Option<&'static str> {
    if let Some(&(_, k)) = ALIASES.iter().find(|(a, _)| *a == raw) {
        return Some(k);
    }
    KEYS.iter().map(|&(k, _)| k).find(|&k| k == raw)
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => match canonical_key(k.trim()) {
                Some(key) => {
                    out.insert(key.to_string(), v.trim().to_string());
                }
                None => errors.push(format!("line {}: unknown key {:?}", i + 1, k.trim())),
            },
            None => errors.push(format!("line {}: expected key=value", i + 1)),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(ConfigError(errors))
    }
}

struct Reader<'a> {
    settings: &'a BTreeMap<String, String>,
    errors: Vec<String>,
}

impl Reader<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.settings.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Option<T>
    where
        T::Err: fmt::Display,
    {
        let raw = self.raw(key)?;
        match raw.parse::<T>() {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors
                    .push(format!("{key}: cannot parse {raw:?}: {e}"));
                None
            }
        }
    }

    fn real(&mut self, key: &str) -> Option<f64> {
        let v: f64 = self.parse(key)?;
        if v.is_finite() {
            Some(v)
        } else {
            self.errors.push(format!("{key}: value must be finite"));
            None
        }
    }

    fn flag(&mut self, key: &str) -> bool {
        match self.raw(key) {
            None => false,
            Some("true" | "1" | "yes") => true,
            Some("false" | "0" | "no") => false,
            Some(other) => {
                self.errors
                    .push(format!("{key}: expected true or false, got {other:?}"));
                false
            }
        }
    }

    fn unit(&mut self, key: &str, default: f64) -> f64 {
        let v = self.real(key).unwrap_or(default);
        if !(v > 0.0 && v < 1.0) {
            self.errors.push(format!("{key}: {v} is outside (0, 1)"));
        }
        v
    }

    fn axis(&mut self, key: &str) -> Option<Axis> {
        let raw = self.raw(key)?;
        let parts: Vec<&str> = raw.split(':').collect();
        let nums: Option<Vec<f64>> = parts.iter().map(|s| s.trim().parse().ok()).collect();
        let result = match nums.as_deref() {
            Some([v]) => Ok(Axis::fixed(*v)),
            Some([lo, hi, step]) => Axis::range(*lo, *hi, *step).map_err(|e| e.to_string()),
            _ => Err(format!(
                "expected lo:hi:step or a single value, got {raw:?}"
            )),
        };
        match result {
            Ok(a) => Some(a),
            Err(e) => {
                self.errors.push(format!("{key}: {e}"));
                None
            }
        }
    }
}

/// Validates merged settings into a [`RunConfig`].
pub fn build_config(
    command: Command,
    settings: &BTreeMap<String, String>,
    default_workers: usize,
) -> Result<RunConfig, ConfigError> {
    let mut r = Reader {
        settings,
        errors: Vec::new(),
    };
    let reference = Params::reference();
    let theta = r.unit("theta", reference.theta);
    if theta > 0.01 {
        r.errors
            .push(format!("theta: {theta} violates us1 (theta <= 1/100)"));
    }
    let eta = r.unit("eta", reference.eta);
    let rho = r.unit("rho", reference.rho);
    let delta = r.unit("delta", reference.delta);
    let kappa = r.real("kappa").unwrap_or(reference.kappa);
    if !(kappa > 0.0) {
        r.errors
            .push(format!("kappa: {kappa} must be positive (us1)"));
    }
    let n = r.real("n");
    if let Some(v) = n {
        if !(v >= 1e3) {
            r.errors.push(format!("n: {v} must be at least 1000"));
        }
    }
    let alpha = match r.raw("alpha") {
        None => Irrational::sqrt(2).ok(),
        Some(s) => match s.parse::<Irrational>() {
            Ok(a) => Some(a),
            Err(e) => {
                r.errors.push(format!("alpha: {e}"));
                None
            }
        },
    };
    let beta = r.real("beta").unwrap_or(0.0);
    let out = r.raw("out").map(PathBuf::from);
    let format = r.parse::<Format>("format").unwrap_or(Format::Json);
    let workers = r.parse::<usize>("workers").unwrap_or(default_workers);
    if workers == 0 {
        r.errors.push("workers: must be at least 1".into());
    }
    let z = r.real("z").unwrap_or(30.0);
    let level = r.real("level").unwrap_or(200.0);
    let signs = match r.raw("sign").unwrap_or("both") {
        "lower" => vec![Sign::Lower],
        "upper" => vec![Sign::Upper],
        "both" => vec![Sign::Lower, Sign::Upper],
        other => {
            r.errors.push(format!(
                "sign: expected lower, upper or both, got {other:?}"
            ));
            vec![]
        }
    };
    let sweep = r.flag("sweep");
    let k = match r.raw("k") {
        None => vec![2, 3],
        Some(s) => match s
            .split(',')
            .map(|t| t.trim().parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
        {
            Ok(v) if !v.is_empty() && v.iter().all(|k| (2..=6).contains(k)) => v,
            _ => {
                r.errors
                    .push(format!("k: expected integers in 2..=6, got {s:?}"));
                vec![]
            }
        },
    };
    let x = r.real("x");
    let y = r.real("y");
    for (key, v) in [("x", x), ("y", y)] {
        if let Some(v) = v {
            if !(v > 0.0) {
                r.errors.push(format!("{key}: {v} must be positive"));
            }
        }
    }
    let nmax = r.parse::<u64>("nmax").unwrap_or(10_000);
    let q = r.parse::<i128>("q");
    if let Some(q) = q {
        if q < 2 {
            r.errors.push(format!("q: {q} must be at least 2"));
        }
    }
    let count = r.parse::<usize>("count").unwrap_or(12);
    let objective = r
        .parse::<Objective>("objective")
        .unwrap_or(Objective::MaxSigma0Margin);
    let grid = GridSpec {
        axes: [
            r.axis("theta_range"),
            r.axis("eta_range"),
            r.axis("rho_range"),
            r.axis("delta_range"),
            r.axis("kappa_range"),
        ],
    };
    let debug_chi = r.flag("debug_chi");
    let records = r.flag("records");
    let use_gamma_weights = r.raw("use_gamma_weights").is_none() || r.flag("use_gamma_weights");

    if !r.errors.is_empty() {
        return Err(ConfigError(r.errors));
    }
    Ok(RunConfig {
        command,
        params: Params {
            theta,
            eta,
            rho,
            delta,
            kappa,
            n,
        },
        n,
        alpha: alpha.expect("validated"),
        beta,
        out,
        format,
        workers,
        z,
        level,
        signs,
        sweep,
        k,
        x,
        y,
        nmax,
        q,
        count,
        objective,
        grid,
        debug_chi,
        records,
        use_gamma_weights,
    })
}
