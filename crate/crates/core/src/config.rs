//! Model configuration: variables, value domain, arithmetic, cost weights,
//! heap size and series truncation.

use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::diagram::Basic;
use crate::error::{Error, Result};
use crate::expr::Env;

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "TRACE_HOARE_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Arith {
    /// Wrap around modulo the domain size.
    Mod,
    /// Clamp to the domain bounds.
    Sat,
}

/// Weight of each basic when counting steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostModel {
    pub assign: u64,
    pub cond: u64,
    pub join: u64,
    pub pointer: u64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            assign: 1,
            cond: 1,
            join: 0,
            pointer: 1,
        }
    }
}

impl CostModel {
    /// The model in which the merge node also costs one step.
    pub fn table() -> Self {
        CostModel {
            join: 1,
            ..CostModel::default()
        }
    }

    pub fn weight(&self, b: &Basic) -> u64 {
        match b {
            Basic::Assign { .. } => self.assign,
            Basic::Cond(_) => self.cond,
            Basic::Join => self.join,
            Basic::Lookup { .. } | Basic::Mutate { .. } | Basic::New { .. } | Basic::Dispose(_) => {
                self.pointer
            }
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Config {
    pub vars: Vec<String>,
    pub lo: i64,
    pub hi: i64,
    pub arith: Arith,
    pub cost: CostModel,
    pub addrs: usize,
    pub trunc: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            vars: vec!["x".into(), "y".into()],
            lo: 0,
            hi: 7,
            arith: Arith::Mod,
            cost: CostModel::default(),
            addrs: 3,
            trunc: 32,
        }
    }
}

impl Config {
    pub fn with_vars(mut self, vars: &[&str]) -> Self {
        self.vars = vars.iter().map(|v| v.to_string()).collect();
        self
    }

    pub fn with_domain(mut self, lo: i64, hi: i64) -> Self {
        self.lo = lo;
        self.hi = hi;
        self
    }

    pub fn with_cost(mut self, cost: CostModel) -> Self {
        self.cost = cost;
        self
    }

    pub fn with_addrs(mut self, addrs: usize) -> Self {
        self.addrs = addrs;
        self
    }

    pub fn with_trunc(mut self, trunc: usize) -> Self {
        self.trunc = trunc;
        self
    }

    /// Parses `key=value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Config::parse(&text)
    }

    /// Loads from `path`, else from the file named by [`CONFIG_ENV`], else defaults.
    pub fn resolve(path: Option<&Path>) -> Result<Config> {
        if let Some(p) = path {
            return Config::load(p);
        }
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Config::load(Path::new(&p)),
            _ => Ok(Config::default()),
        }
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let num = |v: &str| {
            v.parse::<u64>()
                .map_err(|_| format!("`{v}` is not a natural number"))
        };
        match key {
            "vars" => {
                self.vars = value
                    .split(',')
                    .map(|v| v.trim().to_string())
                    .filter(|v| !v.is_empty())
                    .collect();
            }
            "domain" => {
                let (lo, hi) = value
                    .split_once("..")
                    .ok_or_else(|| format!("domain must look like lo..hi, got `{value}`"))?;
                self.lo = lo.trim().parse().map_err(|_| format!("bad bound `{lo}`"))?;
                self.hi = hi.trim().parse().map_err(|_| format!("bad bound `{hi}`"))?;
            }
            "arith" => {
                self.arith = match value {
                    "mod" => Arith::Mod,
                    "sat" => Arith::Sat,
                    _ => return Err(format!("arith must be mod or sat, got `{value}`")),
                }
            }
            "cost.assign" => self.cost.assign = num(value)?,
            "cost.cond" => self.cost.cond = num(value)?,
            "cost.join" => self.cost.join = num(value)?,
            "cost.pointer" => self.cost.pointer = num(value)?,
            "addrs" => self.addrs = num(value)? as usize,
            "trunc" => self.trunc = num(value)? as usize,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo > self.hi {
            return Err(Error::Config(format!(
                "empty domain {}..{}",
                self.lo, self.hi
            )));
        }
        if self.trunc == 0 {
            return Err(Error::Config("trunc must be at least 1".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for v in &self.vars {
            if !crate::expr::is_ident(v) || !seen.insert(v) {
                return Err(Error::Config(format!("bad or repeated variable `{v}`")));
            }
        }
        Ok(())
    }

    pub fn store_space(&self) -> StoreSpace {
        StoreSpace {
            vars: self.vars.clone(),
            lo: self.lo,
            hi: self.hi,
            arith: self.arith,
        }
    }
}

/// The finite set of stores `vars -> lo..=hi`, indexed in mixed radix
/// (first variable most significant).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreSpace {
    pub vars: Vec<String>,
    pub lo: i64,
    pub hi: i64,
    pub arith: Arith,
}

impl StoreSpace {
    pub fn domain_size(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn size(&self) -> usize {
        self.domain_size().pow(self.vars.len() as u32)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Brings an arbitrary integer into the domain.
    pub fn reduce(&self, v: i64) -> i64 {
        match self.arith {
            Arith::Mod => self.lo + (v - self.lo).rem_euclid(self.domain_size() as i64),
            Arith::Sat => v.clamp(self.lo, self.hi),
        }
    }

    pub fn contains_value(&self, v: i64) -> bool {
        (self.lo..=self.hi).contains(&v)
    }

    pub fn index(&self, store: &[i64]) -> usize {
        let n = self.domain_size();
        store
            .iter()
            .fold(0, |acc, v| acc * n + (v - self.lo) as usize)
    }

    pub fn store(&self, mut index: usize) -> Vec<i64> {
        let n = self.domain_size();
        let mut out = vec![self.lo; self.vars.len()];
        for slot in out.iter_mut().rev() {
            *slot = self.lo + (index % n) as i64;
            index /= n;
        }
        out
    }

    pub fn stores(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.size()).map(move |i| self.store(i))
    }

    pub fn env<'a>(&'a self, store: &'a [i64]) -> StoreEnv<'a> {
        StoreEnv { space: self, store }
    }

    /// Parses `x=0,y=3` (missing variables default to the domain minimum).
    pub fn parse_store(&self, text: &str) -> Result<Vec<i64>> {
        let mut store = vec![self.lo; self.vars.len()];
        for part in text.split([',', ' ']).filter(|p| !p.trim().is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::parse(1, 1, format!("expected var=value, got `{part}`")))?;
            let i = self
                .var_index(k.trim())
                .ok_or_else(|| Error::UnboundVariable(k.trim().to_string()))?;
            let v: i64 = v
                .trim()
                .parse()
                .map_err(|_| Error::parse(1, 1, format!("bad value `{v}`")))?;
            if !self.contains_value(v) {
                return Err(Error::Config(format!(
                    "value {v} outside domain {}..{}",
                    self.lo, self.hi
                )));
            }
            store[i] = v;
        }
        Ok(store)
    }

    pub fn show(&self, store: &[i64]) -> String {
        self.vars
            .iter()
            .zip(store)
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub struct StoreEnv<'a> {
    space: &'a StoreSpace,
    store: &'a [i64],
}

impl Env for StoreEnv<'_> {
    fn lookup(&self, name: &str) -> Option<i64> {
        self.space.var_index(name).map(|i| self.store[i])
    }

    fn quantifier_range(&self) -> (i64, i64) {
        (self.space.lo, self.space.hi)
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vars={}", self.vars.join(","))?;
        writeln!(f, "domain={}..{}", self.lo, self.hi)?;
        writeln!(
            f,
            "arith={}",
            if self.arith == Arith::Mod {
                "mod"
            } else {
                "sat"
            }
        )?;
        writeln!(f, "cost.assign={}", self.cost.assign)?;
        writeln!(f, "cost.cond={}", self.cost.cond)?;
        writeln!(f, "cost.join={}", self.cost.join)?;
        writeln!(f, "cost.pointer={}", self.cost.pointer)?;
        writeln!(f, "addrs={}", self.addrs)?;
        writeln!(f, "trunc={}", self.trunc)
    }
}
