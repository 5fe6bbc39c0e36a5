//! Choice of supporting locations and truncation of the correlation length.

use rand::Rng;

use super::Locations;
use crate::error::{Error, Result};

/// Minimum number of supporting points (fewer only when the stream is smaller).
pub const MIN_SUPPORTS: usize = 5;

/// Largest index gap enforced between consecutive supports: two observations
/// in between.
const MAX_INDEX_GAP: usize = 3;

const SHRINK: f64 = 0.9;
const MAX_SHRINK_STEPS: usize = 400;

/// Partition of a stream's location indices into supports and the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportSelection {
    pub support: Vec<usize>,
    pub remaining: Vec<usize>,
    /// Grid offset used for the selection, in location units.
    pub grid_offset: f64,
    /// Grid spacing actually used (3ψ/2 unless shrunk).
    pub spacing: f64,
}

impl SupportSelection {
    /// Builds a selection from explicit support indices into `n` locations.
    pub fn from_indices(mut support: Vec<usize>, n: usize) -> Result<Self> {
        support.sort_unstable();
        support.dedup();
        if support.is_empty() {
            return Err(Error::input("support set must not be empty"));
        }
        if support.iter().any(|&i| i >= n) {
            return Err(Error::input("support index out of range"));
        }
        let mut is_support = vec![false; n];
        for &i in &support {
            is_support[i] = true;
        }
        let remaining = (0..n).filter(|&i| !is_support[i]).collect();
        Ok(SupportSelection {
            support,
            remaining,
            grid_offset: 0.0,
            spacing: f64::NAN,
        })
    }

    pub fn n_support(&self) -> usize {
        self.support.len()
    }

    pub fn n_total(&self) -> usize {
        self.support.len() + self.remaining.len()
    }

    /// Mean distance between consecutive supporting locations.
    pub fn mean_spacing(&self, locs: &Locations) -> f64 {
        let m = self.support.len();
        if m < 2 {
            return f64::NAN;
        }
        let t = locs.as_slice();
        (t[self.support[m - 1]] - t[self.support[0]]) / (m - 1) as f64
    }

    /// Scatters support and remaining values back into location order.
    pub fn merge(&self, at_support: &[f64], at_remaining: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_total()];
        for (&i, &v) in self.support.iter().zip(at_support) {
            out[i] = v;
        }
        for (&i, &v) in self.remaining.iter().zip(at_remaining) {
            out[i] = v;
        }
        out
    }
}

/// Truncation bounds for the correlation length given a support selection:
/// the upper bound is the location range, the lower bound two thirds of the
/// mean spacing between consecutive supports.
pub fn psi_truncation_bounds(locs: &Locations, support: &SupportSelection) -> Result<(f64, f64)> {
    if locs.len() < 2 {
        return Err(Error::input("truncation bounds need at least two locations"));
    }
    if support.n_support() < 2 {
        return Err(Error::input("truncation bounds need at least two supports"));
    }
    let upper = locs.range();
    let lower = 2.0 / 3.0 * support.mean_spacing(locs);
    if !(lower < upper) {
        return Err(Error::input(format!(
            "degenerate truncation bounds ({lower}, {upper})"
        )));
    }
    Ok((lower, upper))
}

/// Selects supports for correlation length `psi` with a grid offset drawn
/// uniformly from `[0, 3ψ/2)`.
pub fn select_supporting_points<R: Rng + ?Sized>(
    locs: &Locations,
    psi: f64,
    rng: &mut R,
) -> Result<SupportSelection> {
    if !(psi.is_finite() && psi > 0.0) {
        return Err(Error::input(format!("correlation length must be positive, got {psi}")));
    }
    let offset = rng.random::<f64>() * 1.5 * psi;
    select_supporting_points_at(locs, psi, offset)
}

/// Deterministic support selection for a given grid offset.
///
/// Grid nodes `min(t) + offset + j * 3ψ/2` are clamped into the location
/// range, so both end points are always nodes. Each node picks the nearest
/// observation; a pick closer than the minimum index gap to the previous
/// support advances to the next admissible index. The spacing shrinks until
/// at least `min(5, n)` supports result.
pub fn select_supporting_points_at(
    locs: &Locations,
    psi: f64,
    offset: f64,
) -> Result<SupportSelection> {
    if !(psi.is_finite() && psi > 0.0) {
        return Err(Error::input(format!("correlation length must be positive, got {psi}")));
    }
    if !offset.is_finite() {
        return Err(Error::input("grid offset must be finite"));
    }
    let n = locs.len();
    let nominal = 1.5 * psi;
    if n <= MIN_SUPPORTS {
        let mut sel = SupportSelection::from_indices((0..n).collect(), n)?;
        sel.grid_offset = offset;
        sel.spacing = nominal;
        return Ok(sel);
    }
    let range = locs.range();
    if range <= 0.0 {
        return Err(Error::input("locations span a zero range"));
    }

    let target = MIN_SUPPORTS.min(n);
    let min_gap = ((n - 1) / (target - 1)).clamp(1, MAX_INDEX_GAP);
    let frac = (offset / nominal).rem_euclid(1.0);

    let mut spacing = nominal;
    for step in 0..MAX_SHRINK_STEPS {
        let picked = grid_pick(locs.as_slice(), spacing, frac * spacing, min_gap);
        if picked.len() >= target {
            let mut sel = SupportSelection::from_indices(picked, n)?;
            sel.grid_offset = frac * spacing;
            sel.spacing = spacing;
            return Ok(sel);
        }
        // jump straight to the largest spacing that can give enough nodes
        let cap = range / (target - 1) as f64;
        spacing = if step == 0 && spacing > cap { cap } else { spacing * SHRINK };
    }

    // Unreachable for finite data: at small spacing every min_gap-th index is taken.
    let fallback = (0..target).map(|j| j * (n - 1) / (target - 1)).collect();
    let mut sel = SupportSelection::from_indices(fallback, n)?;
    sel.grid_offset = frac * spacing;
    sel.spacing = spacing;
    Ok(sel)
}

fn grid_pick(t: &[f64], spacing: f64, offset: f64, min_gap: usize) -> Vec<usize> {
    let n = t.len();
    let (lo, hi) = (t[0], t[n - 1]);
    let eps = 1e-9 * spacing;

    let mut nodes = Vec::new();
    let first = lo + offset;
    if first > lo + eps {
        nodes.push(lo);
    }
    let mut j = 0.0;
    loop {
        let x = first + j * spacing;
        if x >= hi - eps {
            break;
        }
        nodes.push(x);
        j += 1.0;
    }
    nodes.push(hi);

    let mut picked: Vec<usize> = Vec::with_capacity(nodes.len());
    for node in nodes {
        let mut cand = nearest_index(t, node);
        if let Some(&last) = picked.last() {
            if cand < last + min_gap {
                cand = last + min_gap;
            }
        }
        if cand < n {
            picked.push(cand);
        }
    }
    picked
}

fn nearest_index(t: &[f64], x: f64) -> usize {
    let i = t.partition_point(|&v| v < x);
    if i == 0 {
        0
    } else if i == t.len() {
        t.len() - 1
    } else if (x - t[i - 1]) <= (t[i] - x) {
        i - 1
    } else {
        i
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(lo: f64, hi: f64, n: usize) -> Locations {
        Locations::new((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()).unwrap()
    }

    #[test]
    fn bounds_on_integer_grid() {
        let locs = grid(0.0, 10.0, 11);
        let sel = SupportSelection::from_indices(vec![0, 2, 4, 6, 8, 10], 11).unwrap();
        let (lo, hi) = psi_truncation_bounds(&locs, &sel).unwrap();
        assert!((lo - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(hi, 10.0);
    }

    #[test]
    fn bounds_on_two_points() {
        let locs = Locations::new(vec![0.0, 1.0]).unwrap();
        let sel = SupportSelection::from_indices(vec![0, 1], 2).unwrap();
        let (lo, hi) = psi_truncation_bounds(&locs, &sel).unwrap();
        assert!((lo - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn bounds_need_two_locations() {
        let locs = Locations::new(vec![0.3]).unwrap();
        let sel = SupportSelection::from_indices(vec![0], 1).unwrap();
        assert!(psi_truncation_bounds(&locs, &sel).is_err());
    }

    #[test]
    fn bounds_on_dense_uniform_points() {
        // 1000 points on [0.7, 1.0]; supports every 0.05 -> 7 supports.
        let locs = grid(0.7, 1.0, 1000);
        let t = locs.as_slice();
        let idx: Vec<usize> = (0..7)
            .map(|j| {
                let x = 0.7 + 0.05 * j as f64;
                nearest_index(t, x)
            })
            .collect();
        let sel = SupportSelection::from_indices(idx, 1000).unwrap();
        let (lo, hi) = psi_truncation_bounds(&locs, &sel).unwrap();
        // mean spacing = (t[last] - t[first]) / 6 computed on the generated grid
        let expected = 2.0 / 3.0 * (t[sel.support[6]] - t[sel.support[0]]) / 6.0;
        assert!((lo - expected).abs() < 1e-15);
        assert!((lo - 0.1 / 3.0).abs() < 1e-4);
        assert!((hi - 0.3).abs() < 1e-12);
    }

    #[test]
    fn dense_range_zero_offset_hits_grid_nodes() {
        let locs = grid(0.0, 9.0, 901);
        let sel = select_supporting_points_at(&locs, 1.0, 0.0).unwrap();
        let chosen = locs.subset(&sel.support);
        let expected = [0.0, 1.5, 3.0, 4.5, 6.0, 7.5, 9.0];
        assert_eq!(chosen.len(), 7);
        for (c, e) in chosen.iter().zip(expected) {
            assert!((c - e).abs() < 1e-9, "{chosen:?}");
        }
    }

    #[test]
    fn tiny_stream_uses_all_points() {
        let locs = Locations::new(vec![0.1, 0.4, 0.9]).unwrap();
        let sel = select_supporting_points_at(&locs, 0.01, 0.0).unwrap();
        assert_eq!(sel.support, vec![0, 1, 2]);
        assert!(sel.remaining.is_empty());
    }

    #[test]
    fn long_correlation_length_shrinks_to_five() {
        let locs = grid(0.0, 1.0, 200);
        let sel = select_supporting_points_at(&locs, 3.0, 0.0).unwrap();
        assert!(sel.n_support() >= 5);
        assert!(sel.spacing < 1.5 * 3.0);
    }

    #[test]
    fn index_gap_leaves_two_points_between() {
        let locs = grid(0.0, 1.0, 100);
        // spacing far below the data spacing
        let sel = select_supporting_points_at(&locs, 1e-4, 0.0).unwrap();
        for w in sel.support.windows(2) {
            assert!(w[1] - w[0] >= 3);
        }
    }

    #[test]
    fn sparse_ten_points_get_five_supports() {
        let locs = Locations::new(vec![0.55, 0.6, 0.71, 0.8, 0.95, 1.02, 1.1, 1.3, 1.41, 1.49]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let psi = rng.random_range(0.01..2.0);
            let sel = select_supporting_points(&locs, psi, &mut rng).unwrap();
            assert!(sel.n_support() >= 5);
        }
    }

    #[test]
    fn supports_keep_psi_above_lower_bound_when_unclamped() {
        let locs = grid(0.0, 1.0, 2000);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let psi = rng.random_range(0.01..0.15);
            let sel = select_supporting_points(&locs, psi, &mut rng).unwrap();
            let (lo, hi) = psi_truncation_bounds(&locs, &sel).unwrap();
            assert!(lo <= psi + 1e-12 && psi <= hi, "psi {psi} bounds ({lo},{hi})");
        }
    }

    #[test]
    fn empty_locations_rejected() {
        assert!(Locations::new(vec![]).is_err());
    }
}
