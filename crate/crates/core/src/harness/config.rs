//! Flat `key=value` configuration shared by the config file and the
//! command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GridBlock, MIN_MESH};

/// Environment variable consulted for the seed when neither the file nor
/// the flags set one.
pub const SEED_ENV: &str = "WDVR_SEED";
pub const DEFAULT_SEED: u64 = 20_170_707;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    ValidateFamily,
    Divide,
    Dbar,
    PshCheck,
    Approx,
    Suite,
}

impl Subcommand {
    pub const ALL: [Subcommand; 6] = [
        Subcommand::ValidateFamily,
        Subcommand::Divide,
        Subcommand::Dbar,
        Subcommand::PshCheck,
        Subcommand::Approx,
        Subcommand::Suite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::ValidateFamily => "validate-family",
            Subcommand::Divide => "divide",
            Subcommand::Dbar => "dbar",
            Subcommand::PshCheck => "psh-check",
            Subcommand::Approx => "approx",
            Subcommand::Suite => "suite",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::usage(format!("unknown subcommand `{s}`")))
    }
}

/// Every accepted key. Flags use the same spelling with a leading `--`.
pub const KEYS: &[&str] = &[
    "family",
    "gamma",
    "kexp",
    "level-fn",
    "level-scale",
    "h",
    "k",
    "J",
    "block",
    "grid-n",
    "trunc-J",
    "tol",
    "max-iter",
    "j-max",
    "seed",
    "m",
    "epsilon",
    "blocks",
    "block-step",
    "input",
    "omega",
    "f",
    "g",
    "rho",
    "x-cap",
    "t-cap",
    "format",
    "out-dir",
];

/// Output format for grid fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldFormat {
    Text,
    Binary,
}

/// A fully validated run. Optional fields fall back to per-subcommand
/// defaults in the runner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub family: String,
    pub gamma: Option<f64>,
    pub kexp: Option<u32>,
    pub level_fn: String,
    pub level_scale: f64,
    pub h: f64,
    pub k: f64,
    pub scan_bound: usize,
    pub block: GridBlock,
    pub trunc: usize,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub j_max: usize,
    pub seed: u64,
    pub m: usize,
    pub epsilon: f64,
    pub blocks: usize,
    pub block_step: f64,
    pub input: Option<String>,
    pub omega: String,
    pub f: Option<PathBuf>,
    pub g: Option<PathBuf>,
    pub rho: Option<Vec<f64>>,
    pub x_cap: Option<usize>,
    pub t_cap: Option<usize>,
    pub format: FieldFormat,
    pub out_dir: PathBuf,
}

/// Parses config text into a key map. Later duplicates win.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(idx + 1, format!("expected `key=value`, got `{line}`")))?;
        let key = key.trim();
        check_key(key)?;
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn check_key(key: &str) -> Result<()> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        Err(Error::usage(format!("unknown config key `{key}`")))
    }
}

fn value<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    map.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| Error::usage(format!("invalid value `{v}` for key `{key}`")))
        })
        .transpose()
}

fn list(map: &BTreeMap<String, String>, key: &str) -> Result<Option<Vec<f64>>> {
    map.get(key)
        .map(|v| {
            v.split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::usage(format!("invalid list entry `{p}` for key `{key}`")))
                })
                .collect()
        })
        .transpose()
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::usage(format!("key `{key}` must be positive, got {v}")))
    }
}

/// Merges the optional config file with flag overrides (flags win),
/// rejects unknown keys and validates every value.
pub fn load_config(
    subcommand: Subcommand,
    file_text: Option<&str>,
    overrides: &[(String, String)],
) -> Result<RunConfig> {
    let mut map = match file_text {
        Some(text) => parse_config_text(text)?,
        None => BTreeMap::new(),
    };
    for (k, v) in overrides {
        check_key(k)?;
        map.insert(k.clone(), v.clone());
    }

    let h = value(&map, "h")?.unwrap_or(0.5);
    let k = value(&map, "k")?.unwrap_or(0.9);
    positive("h", h)?;
    positive("k", k)?;
    if subcommand == Subcommand::ValidateFamily && h >= k {
        return Err(Error::Ordering {
            lower_name: "h",
            upper_name: "k",
            lower: h,
            upper: k,
        });
    }

    let grid_n = value(&map, "grid-n")?.unwrap_or(64usize);
    if grid_n < MIN_MESH {
        return Err(Error::usage(format!(
            "key `grid-n` must be at least {MIN_MESH}, got {grid_n}"
        )));
    }
    let block = match list(&map, "block")? {
        None => GridBlock::square(1.0, grid_n)?,
        Some(b) if b.len() == 4 => GridBlock::new(b[0], b[1], b[2], b[3], grid_n)?,
        Some(b) => {
            return Err(Error::usage(format!(
                "key `block` needs a,b,c,d, got {} values",
                b.len()
            )))
        }
    };

    let scan_bound = value(&map, "J")?.unwrap_or(200usize);
    if scan_bound < 2 {
        return Err(Error::usage(format!("key `J` must be at least 2, got {scan_bound}")));
    }
    let tol: Option<f64> = value(&map, "tol")?;
    if let Some(t) = tol {
        positive("tol", t)?;
    }
    let max_iter: Option<usize> = value(&map, "max-iter")?;
    if max_iter == Some(0) {
        return Err(Error::usage("key `max-iter` must be at least 1"));
    }
    let m = value(&map, "m")?.unwrap_or(1usize);
    if m == 0 {
        return Err(Error::usage("key `m` must be at least 1"));
    }
    let epsilon = positive("epsilon", value(&map, "epsilon")?.unwrap_or(1e-3))?;
    let blocks = value(&map, "blocks")?.unwrap_or(1usize);
    if blocks == 0 {
        return Err(Error::usage("key `blocks` must be at least 1"));
    }
    let block_step = positive("block-step", value(&map, "block-step")?.unwrap_or(1.0))?;
    let rho = list(&map, "rho")?;
    if let Some(r) = &rho {
        for v in r {
            positive("rho", *v)?;
        }
    }
    let seed = match value(&map, "seed")? {
        Some(s) => s,
        None => match std::env::var(SEED_ENV) {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::usage(format!("invalid value `{s}` in {SEED_ENV}")))?,
            Err(_) => DEFAULT_SEED,
        },
    };
    let format = match map.get("format").map(String::as_str) {
        None | Some("text") => FieldFormat::Text,
        Some("binary") => FieldFormat::Binary,
        Some(other) => return Err(Error::usage(format!("invalid value `{other}` for key `format`"))),
    };

    Ok(RunConfig {
        subcommand,
        family: map.get("family").cloned().unwrap_or_else(|| "factorial".into()),
        gamma: value(&map, "gamma")?,
        kexp: value(&map, "kexp")?,
        level_fn: map.get("level-fn").cloned().unwrap_or_else(|| "exp".into()),
        level_scale: positive("level-scale", value(&map, "level-scale")?.unwrap_or(1.0))?,
        h,
        k,
        scan_bound,
        block,
        trunc: value(&map, "trunc-J")?.unwrap_or(3),
        tol,
        max_iter,
        j_max: value(&map, "j-max")?.unwrap_or(50),
        seed,
        m,
        epsilon,
        blocks,
        block_step,
        input: map.get("input").cloned(),
        omega: map.get("omega").cloned().unwrap_or_else(|| "one".into()),
        f: map.get("f").map(PathBuf::from),
        g: map.get("g").map(PathBuf::from),
        rho,
        x_cap: value(&map, "x-cap")?,
        t_cap: value(&map, "t-cap")?,
        format,
        out_dir: map
            .get("out-dir")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("wdvr-out")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kv(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn flags_only_fill_defaults() {
        let c = load_config(
            Subcommand::ValidateFamily,
            None,
            &kv(&[
                ("family", "factorial"),
                ("h", "0.5"),
                ("k", "0.9"),
                ("J", "200"),
                ("seed", "1"),
            ]),
        )
        .unwrap();
        assert_eq!(c.scan_bound, 200);
        assert_eq!(c.block, GridBlock::square(1.0, 64).unwrap());
        assert_eq!(c.level_fn, "exp");
    }

    #[test]
    fn unknown_key_is_named() {
        let err = load_config(Subcommand::Suite, Some("h = 0.5\nfoo = 1\n"), &[]).unwrap_err();
        assert!(err.to_string().contains("`foo`"), "{err}");
    }

    #[test]
    fn flags_override_file() {
        let c = load_config(
            Subcommand::Dbar,
            Some("# comment\ngrid-n = 16\ntol=1e-6 # inline\n"),
            &kv(&[("grid-n", "8")]),
        )
        .unwrap();
        assert_eq!(c.block.n, 8);
        assert_eq!(c.tol, Some(1e-6));
    }

    #[test]
    fn ordering_is_checked() {
        let err = load_config(Subcommand::ValidateFamily, None, &kv(&[("h", "0.9"), ("k", "0.5")])).unwrap_err();
        assert!(matches!(err, Error::Ordering { .. }));
    }

    #[test]
    fn bad_values_name_their_key() {
        for (key, v) in [
            ("grid-n", "4"),
            ("block", "1,2,3"),
            ("tol", "-1"),
            ("format", "xml"),
            ("m", "0"),
        ] {
            let err = load_config(Subcommand::Dbar, None, &kv(&[(key, v)])).unwrap_err();
            assert!(matches!(err, Error::Usage(_)), "{key}: {err}");
        }
        assert!(load_config(Subcommand::Dbar, Some("grid-n 4\n"), &[]).is_err());
    }
}
