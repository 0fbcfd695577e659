use num_rational::Rational64;
use serde::Serialize;

use super::SymbolError;

/// Input to [`singularity_ledger`].
#[derive(Clone, Debug, PartialEq)]
pub struct LedgerQuery {
    /// Fibre dimension.
    pub q: u32,
    /// Order of the degree-0 part.
    pub m: u32,
    /// `orders[p − 1]` is the order of the degree-`p` component, `None` when it vanishes.
    pub orders: Vec<Option<u32>>,
    /// Form degree.
    pub d: usize,
    /// Codimensions `n_p` of the critical components.
    pub codims: Vec<u32>,
    pub v_max: u32,
    /// Reject orders above `m` instead of just reporting them.
    pub enforce_order_bound: bool,
}

/// One factor `d_i = p_{i,1} + … + p_{i,r_i}` of a partition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartitionBlock {
    pub degree: usize,
    pub parts: Vec<usize>,
    pub orders: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularityLedgerEntry {
    pub d: usize,
    pub blocks: Vec<PartitionBlock>,
    pub mu_d: i64,
    pub component: usize,
    pub codim: u32,
    pub v: u32,
    #[serde(serialize_with = "ratio_as_string")]
    pub gamma: Rational64,
    pub log_flag: bool,
    /// `μ_d > 0` at `d ≥ 1`, or `μ_d` below `k − 2m Σ r_i`.
    pub violation: bool,
}

fn ratio_as_string<S: serde::Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// All compositions of `n` into positive parts.
fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in compositions(n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn blocks_for(degree: usize, orders: &[Option<u32>]) -> Vec<PartitionBlock> {
    compositions(degree)
        .into_iter()
        .filter_map(|parts| {
            let ords: Option<Vec<u32>> = parts.iter().map(|&p| orders.get(p - 1).copied().flatten()).collect();
            ords.map(|orders| PartitionBlock { degree, parts, orders })
        })
        .collect()
}

fn partitions(d: usize, orders: &[Option<u32>]) -> Vec<Vec<PartitionBlock>> {
    let mut out = Vec::new();
    for outer in compositions(d) {
        let mut acc: Vec<Vec<PartitionBlock>> = vec![vec![]];
        for &di in &outer {
            let choices = blocks_for(di, orders);
            acc = acc
                .into_iter()
                .flat_map(|prefix| {
                    choices.iter().map(move |b| {
                        let mut v = prefix.clone();
                        v.push(b.clone());
                        v
                    })
                })
                .collect();
        }
        out.extend(acc);
    }
    out
}

/// `μ_d = k − Σ_i (m r_i + Σ_n ν_{i,n})`.
fn mu(m: u32, blocks: &[PartitionBlock]) -> i64 {
    let k = blocks.len() as i64;
    k - blocks.iter().map(|b| m as i64 * b.parts.len() as i64 + b.orders.iter().map(|&o| o as i64).sum::<i64>()).sum::<i64>()
}

/// Exponent table `γ = q + μ_d − n_p/2 − v` with the log flag `γ ≤ 0`.
pub fn singularity_ledger(query: &LedgerQuery) -> Result<Vec<SingularityLedgerEntry>, SymbolError> {
    let LedgerQuery { q, m, ref orders, d, ref codims, v_max, enforce_order_bound } = *query;
    if m == 0 {
        return Err(SymbolError::LedgerQuery("order m must be positive"));
    }
    if d > orders.len() {
        return Err(SymbolError::LedgerQuery("form degree exceeds base dimension"));
    }
    if codims.is_empty() {
        return Err(SymbolError::LedgerQuery("no critical components"));
    }
    if enforce_order_bound && orders.iter().flatten().any(|&o| o > m) {
        return Err(SymbolError::LedgerQuery("component order exceeds m"));
    }
    let parts = partitions(d, orders);
    if parts.is_empty() {
        return Err(SymbolError::EmptyLedger);
    }
    let mut out = Vec::new();
    for blocks in parts {
        let mu_d = mu(m, &blocks);
        let k = blocks.len() as i64;
        let r_total: i64 = blocks.iter().map(|b| b.parts.len() as i64).sum();
        let violation = (d > 0 && mu_d > 0) || mu_d < k - 2 * m as i64 * r_total;
        for (component, &codim) in codims.iter().enumerate() {
            for v in 0..=v_max {
                let gamma = Rational64::from_integer(q as i64 + mu_d - v as i64) - Rational64::new(codim as i64, 2);
                out.push(SingularityLedgerEntry {
                    d,
                    blocks: blocks.clone(),
                    mu_d,
                    component,
                    codim,
                    v,
                    gamma,
                    log_flag: gamma <= Rational64::from_integer(0),
                    violation,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(4).len(), 8);
        // every degree present: Σ over compositions of Π 2^{d_i − 1}
        let all = vec![Some(0); 4];
        assert_eq!(partitions(3, &all).len(), 4 + 2 * 2 + 1);
    }
}
