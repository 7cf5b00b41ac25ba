//! Flat key-value experiment configuration.
//!
//! The text is a TOML subset: one `key = value` per line, dotted keys for symbols, `#`
//! comments. Example:
//!
//! ```text
//! flavor = "hermitian"
//! sigma_x2 = 0.5
//! sigma_y2 = 0.5
//! rho1 = 0.1
//! symbol.family = "geometric"
//! symbol.ratio = 0.5
//! seed = 7
//! n = [256, 512, 1024]
//! ```

use std::collections::BTreeMap;
use std::str::FromStr;

use num_complex::Complex64;
use toml::Value;

use crate::ensembles::{Ensemble, SymbolTable};
use crate::error::{Error, Result};
use crate::model::{BaseDistribution, CorrelationSpec, DeterministicSymbol, Flavor, SymbolFamily};

const RUN_KEYS: &[&str] = &[
    "seed",
    "n",
    "reps",
    "samples",
    "qmc_replicates",
    "grid",
    "word",
    "polynomial",
    "k",
    "cases",
    "n_min",
    "n_max",
    "max_len",
    "families",
    "bins",
    "max_moment",
    "tol",
    "base_alt",
];
const SPEC_KEYS: &[&str] = &[
    "flavor",
    "sigma_x2",
    "sigma_y2",
    "beta",
    "rho",
    "rho1",
    "rho2",
    "rho3",
    "rho4",
    "rho5",
    "rho6",
    "base",
    "moment_cap_check",
];
const SYMBOL_FIELDS: &[&str] = &["family", "ratio", "scale", "exponent", "values"];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// The text the configuration was parsed from, with overrides appended.
    pub text: String,
    values: BTreeMap<String, Value>,
}

fn err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            _ => {
                out.insert(key, v.clone());
            }
        }
    }
}

fn known(key: &str) -> bool {
    if RUN_KEYS.contains(&key) || SPEC_KEYS.contains(&key) {
        return true;
    }
    let Some((head, field)) = key.split_once('.') else {
        return false;
    };
    let field = field.strip_prefix("paired.").unwrap_or(field);
    let head_ok = head == "symbol" || head.strip_prefix("symbol_").is_some_and(|c| c.parse::<u32>().is_ok());
    head_ok && SYMBOL_FIELDS.contains(&field)
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(err(format!("`{key}` must be a number"))),
    }
}

fn as_complex(key: &str, v: &Value) -> Result<Complex64> {
    match v {
        Value::Array(a) if a.len() == 2 => Ok(Complex64::new(as_f64(key, &a[0])?, as_f64(key, &a[1])?)),
        _ => Ok(Complex64::new(as_f64(key, v)?, 0.0)),
    }
}

fn as_usize(key: &str, v: &Value) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(err(format!("`{key}` must be a non-negative integer"))),
    }
}

impl FromStr for Config {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| err(e.message().to_string()))?;
        let mut values = BTreeMap::new();
        flatten("", &table, &mut values);
        if let Some(k) = values.keys().find(|k| !known(k)) {
            return Err(err(format!("unknown key `{k}`")));
        }
        Ok(Config { text: text.to_string(), values })
    }
}

impl Config {
    pub fn empty() -> Self {
        Config { text: String::new(), values: BTreeMap::new() }
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    /// Override one key with a value written in the same syntax as the file.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !known(key) {
            return Err(err(format!("unknown key `{key}`")));
        }
        let line = format!("{key} = {value}\n");
        let parsed = line
            .parse::<toml::Table>()
            .or_else(|_| format!("{key} = {:?}\n", value).parse::<toml::Table>())
            .map_err(|e| err(e.message().to_string()))?;
        flatten("", &parsed, &mut self.values);
        self.text.push_str(&line);
        Ok(())
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.values.get(key).map(|v| as_f64(key, v)).transpose()
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.values.get(key).map(|v| as_usize(key, v)).transpose()
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        Ok(self.usize(key)?.map(|x| x as u64))
    }

    pub fn str(&self, key: &str) -> Result<Option<&str>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(err(format!("`{key}` must be a string"))),
        }
    }

    /// A single integer or a list of them.
    pub fn usize_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Array(a)) => a.iter().map(|v| as_usize(key, v)).collect::<Result<_>>().map(Some),
            Some(v) => Ok(Some(vec![as_usize(key, v)?])),
        }
    }

    pub fn str_list(&self, key: &str) -> Result<Option<Vec<String>>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| v.as_str().map(str::to_string).ok_or_else(|| err(format!("`{key}` must list strings"))))
                .collect::<Result<_>>()
                .map(Some),
            Some(Value::String(s)) => Ok(Some(s.split(',').map(|x| x.trim().to_string()).collect())),
            Some(_) => Err(err(format!("`{key}` must be a string list"))),
        }
    }

    /// The correlation spec, or `None` when the file names no flavor.
    pub fn spec(&self) -> Result<Option<CorrelationSpec>> {
        let Some(flavor) = self.str("flavor")? else {
            if SPEC_KEYS.iter().any(|k| *k != "base" && self.contains(k)) {
                return Err(err("correlation keys given without `flavor`"));
            }
            return Ok(None);
        };
        let flavor: Flavor = flavor.parse()?;
        let sx = self.f64("sigma_x2")?;
        let sy = self.f64("sigma_y2")?;
        let mut spec = match flavor {
            Flavor::Generalized => {
                let beta = self.f64("beta")?.or(sx).unwrap_or(0.5);
                CorrelationSpec::generalized(beta, [0.0; 6])
            }
            Flavor::RealSymmetric => CorrelationSpec::real_symmetric(sx.unwrap_or(1.0)),
            Flavor::Hermitian => {
                CorrelationSpec::hermitian(sx.unwrap_or(0.5), sy.unwrap_or(0.5), self.f64("rho1")?.unwrap_or(0.0))
            }
            Flavor::RealAsymmetric => CorrelationSpec::new(sx.unwrap_or(1.0), 0.0, [0.0; 6], flavor),
            Flavor::PairReflected => CorrelationSpec::new(sx.unwrap_or(0.5), sy.unwrap_or(0.5), [0.0; 6], flavor),
        };
        if let Some(v) = self.values.get("rho") {
            let a = v.as_array().filter(|a| a.len() == 6).ok_or_else(|| err("`rho` must list six numbers"))?;
            for (i, x) in a.iter().enumerate() {
                spec.rho[i] = as_f64("rho", x)?;
            }
        }
        for i in 1..=6 {
            if let Some(x) = self.f64(&format!("rho{i}"))? {
                spec.rho[i - 1] = x;
            }
        }
        if flavor != Flavor::Generalized {
            if let Some(x) = sx {
                spec.sigma_x2 = x;
            }
            if let Some(y) = sy {
                spec.sigma_y2 = y;
            }
        }
        if let Some(b) = self.str("base")? {
            spec.base_distribution = b.parse::<BaseDistribution>()?;
        }
        if let Some(v) = self.values.get("moment_cap_check") {
            spec.moment_cap_check = v.as_bool().ok_or_else(|| err("`moment_cap_check` must be a boolean"))?;
        }
        Ok(Some(spec))
    }

    fn family(&self, prefix: &str) -> Result<Option<SymbolFamily>> {
        let key = |f: &str| format!("{prefix}.{f}");
        let Some(name) = self.str(&key("family"))? else {
            if SYMBOL_FIELDS.iter().any(|f| self.contains(&key(f))) {
                return Err(err(format!("`{prefix}` fields given without `{prefix}.family`")));
            }
            return Ok(None);
        };
        let scale = self.values.get(&key("scale")).map(|v| as_complex(&key("scale"), v)).transpose()?;
        let scale = scale.unwrap_or(Complex64::new(1.0, 0.0));
        let fam = match name.to_ascii_lowercase().as_str() {
            "geometric" => {
                let r = self.values.get(&key("ratio")).ok_or_else(|| err(format!("`{}` is required", key("ratio"))))?;
                SymbolFamily::Geometric { ratio: as_complex(&key("ratio"), r)?, scale }
            }
            "poly" | "polydecay" => {
                let e = self.f64(&key("exponent"))?.ok_or_else(|| err(format!("`{}` is required", key("exponent"))))?;
                SymbolFamily::PolyDecay { exponent: e, scale }
            }
            "delta" | "identity" => SymbolFamily::FiniteSupport(vec![(0, scale)]),
            "finite" => {
                let k = key("values");
                let rows =
                    self.values.get(&k).and_then(Value::as_array).ok_or_else(|| err(format!("`{k}` is required")))?;
                let mut vals = Vec::new();
                for row in rows {
                    let r = row.as_array().filter(|r| r.len() == 2 || r.len() == 3);
                    let r = r.ok_or_else(|| err(format!("`{k}` rows are [index, re] or [index, re, im]")))?;
                    let idx = r[0].as_integer().ok_or_else(|| err(format!("`{k}` indices must be integers")))?;
                    let im = if r.len() == 3 { as_f64(&k, &r[2])? } else { 0.0 };
                    vals.push((idx, Complex64::new(as_f64(&k, &r[1])?, im)));
                }
                SymbolFamily::FiniteSupport(vals)
            }
            other => return Err(err(format!("unknown symbol family `{other}`"))),
        };
        Ok(Some(fam))
    }

    fn symbol(&self, prefix: &str) -> Result<Option<DeterministicSymbol>> {
        let Some(fam) = self.family(prefix)? else {
            return Ok(None);
        };
        let mut sym = DeterministicSymbol::new(fam)?;
        if let Some(second) = self.family(&format!("{prefix}.paired"))? {
            sym = sym.with_paired(second)?;
        }
        Ok(Some(sym))
    }

    pub fn symbols(&self) -> Result<SymbolTable> {
        let mut table = SymbolTable { fallback: self.symbol("symbol")?, ..SymbolTable::default() };
        let copies: Vec<u32> =
            self.values.keys().filter_map(|k| k.split_once('.')?.0.strip_prefix("symbol_")?.parse().ok()).collect();
        for c in copies {
            if let Some(s) = self.symbol(&format!("symbol_{c}"))? {
                table.by_copy.insert(c, s);
            }
        }
        Ok(table)
    }

    pub fn ensemble(&self) -> Result<Ensemble> {
        let spec = self.spec()?.map(|s| s.validate()).transpose()?;
        Ok(Ensemble { spec, symbols: self.symbols()? })
    }
}
