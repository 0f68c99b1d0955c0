use super::{check_separation, Construction, HittingFamily, IndexSet, SepFn};
use crate::{Error, Result};

/// Upper-density family: blocks `B_k = [growth^k, 2 growth^k)`, `k >= k0`,
/// dealt round-robin to `A_1, ..., A_P`; inside its block `A_p` is the
/// progression of step `sep(p, p) + 1` from the block base.
///
/// `k0` is the least `k` with inter-block gap `(growth - 2) growth^k + 1`
/// above every `sep(p, q)`, so separation across blocks is automatic. Each
/// complete block gives `A_p` a counting ratio of at least `1 / (2 s(p))` at
/// the block end.
pub fn generate_block_family(count: usize, sep: SepFn, growth: u64, horizon: u64) -> Result<HittingFamily> {
    if count == 0 {
        return Err(Error::InvalidParameter("family size must be at least 1".into()));
    }
    if growth < 4 {
        return Err(Error::InvalidParameter(format!("block growth {growth} below 4")));
    }
    let max_sep = sep.max_required(count) as u128;
    let g = growth as u128;
    let mut k0 = 0u32;
    while (g - 2) * g.pow(k0) < max_sep {
        k0 += 1;
    }
    let last_needed = k0 + count as u32 - 1;
    if g.checked_pow(last_needed).is_none_or(|b| b > horizon as u128) {
        return Err(Error::HorizonTooSmall {
            horizon,
            reason: format!("block family with P={count}, growth {growth} needs blocks up to {growth}^{last_needed}"),
        });
    }
    let mut sets = vec![Vec::new(); count];
    let mut k = k0;
    while let Some(base) = g.checked_pow(k).filter(|&b| b <= horizon as u128) {
        let p = (k - k0) as usize % count;
        let step = sep.required(p + 1, p + 1) + 1;
        let end = (2 * base - 1).min(horizon as u128) as u64;
        sets[p].extend((base as u64..=end).step_by(step as usize));
        k += 1;
    }
    let sets = sets.into_iter().map(|s| IndexSet::new(s, horizon)).collect::<Result<Vec<_>>>()?;
    let family = HittingFamily::assemble(sets, sep, horizon, Construction::Block { growth, first_block: k0 })?;
    check_separation(&family).map_err(Error::Separation)?;
    Ok(family)
}

/// Lower-density family: `C_p = {K 2^p (2k + 1) : k >= 0}` with every element
/// closer than `sep(p, q)` to some element of `C_q` removed, for all
/// `q > p` up to `max(P, floor(log2(horizon / K)))`.
///
/// `A_p` does not depend on `P`. Distinct `C_p, C_q` are at least `K 2^{min}`
/// apart, so for moderate separations nothing is pruned and `A_p = C_p`
/// with density `1 / (K 2^{p+1})`.
pub fn generate_lower_family(count: usize, sep: SepFn, base: u64, horizon: u64) -> Result<HittingFamily> {
    if count == 0 {
        return Err(Error::InvalidParameter("family size must be at least 1".into()));
    }
    if base < 16 {
        return Err(Error::InvalidParameter(format!("lower-family base K = {base} below 16")));
    }
    let q_max = ((horizon / base).max(1).ilog2() as usize).max(count);
    if q_max >= 62 || base.checked_shl(count as u32 + 1).is_none_or(|x| x >> (count + 1) != base) {
        return Err(Error::InvalidParameter(format!("K 2^P overflows for K = {base}, P = {count}")));
    }
    let mut sets = Vec::with_capacity(count);
    for p in 1..=count {
        let first = base << p;
        let elements: Vec<u64> = (first..=horizon)
            .step_by((first * 2) as usize)
            .filter(|&n| (p + 1..=q_max).all(|q| distance_to_c(n, base, q) >= sep.required(p, q)))
            .collect();
        if elements.is_empty() {
            return Err(Error::EmptyAfterPruning { p, horizon });
        }
        sets.push(IndexSet::new(elements, horizon)?);
    }
    let family = HittingFamily::assemble(sets, sep, horizon, Construction::Lower { base })?;
    check_separation(&family)
        .map_err(|v| Error::InvalidParameter(format!("pruned family is not separated ({v}); use a larger K")))?;
    Ok(family)
}

/// Distance from `n` to the nearest element of `{K 2^q (2k + 1) : k >= 0}`.
fn distance_to_c(n: u64, base: u64, q: usize) -> u64 {
    let Some(first) = base.checked_shl(q as u32).filter(|f| f >> q == base) else {
        return u64::MAX;
    };
    let period = first as u128 * 2;
    let r = ((n as i128 - first as i128).rem_euclid(period as i128)) as u128;
    r.min(period - r).min(u64::MAX as u128) as u64
}
