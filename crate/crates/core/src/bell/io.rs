//! JSON files for counts and inequalities.
//!
//! Counts: `{"m": 2, "d": 2, "counts": {"x,y": [[c00, c01], [c10, c11]], ...}}`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::types::{BellInequality, BellScenario, CountsTable};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountsFile {
    pub m: usize,
    pub d: usize,
    pub counts: BTreeMap<String, Vec<Vec<f64>>>,
}

impl CountsFile {
    pub fn from_table(t: &CountsTable) -> Self {
        let sc = t.scenario();
        let (m, d) = (sc.settings, sc.outcomes);
        let mut counts = BTreeMap::new();
        for x in 0..m {
            for y in 0..m {
                let grid = (0..d).map(|a| (0..d).map(|b| t.get(x, y, a, b)).collect()).collect();
                counts.insert(format!("{x},{y}"), grid);
            }
        }
        Self { m, d, counts }
    }

    pub fn to_table(&self) -> Result<CountsTable> {
        let sc = BellScenario::new(self.m, self.d)?;
        let mut flat = vec![0.0; sc.joint_len()];
        let mut seen = vec![false; self.m * self.m];
        for (key, grid) in &self.counts {
            let (x, y) = parse_key(key, self.m)?;
            if grid.len() != self.d || grid.iter().any(|r| r.len() != self.d) {
                return Err(Error::InvalidInput(format!("counts for \"{key}\" must be {0}x{0}", self.d)));
            }
            seen[x * self.m + y] = true;
            for (a, row) in grid.iter().enumerate() {
                for (b, c) in row.iter().enumerate() {
                    flat[sc.joint_index(x, y, a, b)] = *c;
                }
            }
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidInput(format!("missing counts for \"{},{}\"", k / self.m, k % self.m)));
        }
        CountsTable::new(sc, flat)
    }
}

fn parse_key(key: &str, m: usize) -> Result<(usize, usize)> {
    let bad = || Error::InvalidInput(format!("bad setting key \"{key}\""));
    let (x, y) = key.split_once(',').ok_or_else(bad)?;
    let x: usize = x.trim().parse().map_err(|_| bad())?;
    let y: usize = y.trim().parse().map_err(|_| bad())?;
    if x >= m || y >= m {
        return Err(bad());
    }
    Ok((x, y))
}

/// Flat coefficient arrays in `[x][y][a][b]`, `[x][a]`, `[y][b]` order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityFile {
    pub m: usize,
    pub d: usize,
    pub joint: Vec<f64>,
    pub marginal_a: Vec<f64>,
    pub marginal_b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
}

impl InequalityFile {
    pub fn from_inequality(ineq: &BellInequality, bound: Option<f64>) -> Self {
        let sc = ineq.scenario();
        Self {
            m: sc.settings,
            d: sc.outcomes,
            joint: ineq.joint_coefficients().to_vec(),
            marginal_a: ineq.marginal_a_coefficients().to_vec(),
            marginal_b: ineq.marginal_b_coefficients().to_vec(),
            bound,
        }
    }

    pub fn to_inequality(&self) -> Result<BellInequality> {
        BellInequality::new(
            BellScenario::new(self.m, self.d)?,
            self.joint.clone(),
            self.marginal_a.clone(),
            self.marginal_b.clone(),
        )
    }
}

pub fn read_counts(path: &Path) -> Result<CountsTable> {
    let f: CountsFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    f.to_table()
}

pub fn write_counts(path: &Path, t: &CountsTable) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(&CountsFile::from_table(t))?)?;
    Ok(())
}

pub fn read_inequality(path: &Path) -> Result<(BellInequality, Option<f64>)> {
    let f: InequalityFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    Ok((f.to_inequality()?, f.bound))
}

pub fn write_inequality(path: &Path, ineq: &BellInequality, bound: Option<f64>) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(&InequalityFile::from_inequality(ineq, bound))?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::types::BehaviorTable;

    #[test]
    fn counts_round_trip() {
        let p = BehaviorTable::uniform(BellScenario::chsh());
        let t = CountsTable::from_behavior(&p, 100.0).unwrap();
        let json = serde_json::to_string(&CountsFile::from_table(&t)).unwrap();
        assert!(json.contains("\"0,1\":[[25.0,25.0],[25.0,25.0]]"));
        let back: CountsFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_table().unwrap(), t);
    }

    #[test]
    fn missing_setting_is_rejected() {
        let json = r#"{"m":2,"d":2,"counts":{"0,0":[[1,0],[0,1]]}}"#;
        let f: CountsFile = serde_json::from_str(json).unwrap();
        assert!(f.to_table().is_err());
    }
}
