//! Browser bindings: trap profiles, the coincidence fringe and a small
//! two-atom level scan. Results come back as flat `Float64Array`s.

use wasm_bindgen::prelude::*;

use catsim::config::lin_space;
use catsim::grid::Grid;
use catsim::operator::{scan_levels, Discretization, ScanOptions};
use catsim::potential::{Stage, TrapConfig};
use catsim::protocol::{fringe_scan, MeasurementModel};

fn js_err(e: catsim::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn trap(stage: &str, n: usize, d: f64, v0: f64, u0: f64, asym: f64) -> Result<TrapConfig, JsValue> {
    let stage = Stage::parse(stage).ok_or_else(|| JsValue::from_str("stage must be I, II or III"))?;
    let wells = if stage == Stage::II { 2 } else { n };
    let q = (0..wells).map(|i| if i + 1 == wells && wells > 1 { asym } else { 0.0 }).collect();
    let cfg = TrapConfig { stage, v0, sigma: 0.5, q, d, u0, n_particles: n };
    cfg.validate().map_err(js_err)?;
    Ok(cfg)
}

/// Potential sampled at `points` positions: `[x0, V0, x1, V1, …]`.
#[wasm_bindgen]
pub fn potential_profile(stage: &str, n: usize, d: f64, v0: f64, points: usize) -> Result<Vec<f64>, JsValue> {
    let cfg = trap(stage, n, d, v0, 0.0, 0.0)?;
    let half = cfg.extent_at(d) + 2.5;
    Ok(lin_space(-half, half, points.max(2)).into_iter().flat_map(|x| [x, cfg.potential(x)]).collect())
}

/// `⟨Π s_i⟩` over `points` values of Δ in `[0, 2π)`: `[Δ0, E0, Δ1, E1, …]`.
#[wasm_bindgen]
pub fn fringe(n: usize, visibility: f64, theta: f64, points: usize) -> Result<Vec<f64>, JsValue> {
    let model = MeasurementModel::from_visibility(n, visibility, theta, 0.0).map_err(js_err)?;
    let scan = fringe_scan(&model, points.max(1)).map_err(js_err)?;
    Ok(scan.iter().flat_map(|p| [p.delta, p.expectation]).collect())
}

/// Lowest `levels` two-atom energies on a coarse grid for `points`
/// separations in `[0, d_max]`; row-major `[d, E0 … E_{k−1}]`.
#[wasm_bindgen]
pub fn two_atom_levels(stage: &str, u0: f64, d_max: f64, points: usize, levels: usize) -> Result<Vec<f64>, JsValue> {
    let v0 = if stage.eq_ignore_ascii_case("II") { 30.0 } else { 10.0 };
    let cfg = trap(stage, 2, d_max, v0, u0, 1e-3)?;
    let grid = Grid::for_wells(cfg.extent_at(d_max), cfg.sigma, 4.0, 0.25).map_err(js_err)?;
    let disc = Discretization::new(grid, 2).map_err(js_err)?;
    let d = lin_space(0.0, d_max, points.max(1));
    let curve = scan_levels(&disc, &cfg, &d, levels.max(1), &ScanOptions::default()).map_err(js_err)?;
    Ok(curve.d.iter().zip(&curve.levels).flat_map(|(d, l)| std::iter::once(*d).chain(l.iter().copied())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_is_deepest_between_merged_wells() {
        let p = potential_profile("I", 3, 0.0, 10.0, 101).unwrap();
        let (x, v) = (p[100], p[101]);
        assert!(x.abs() < 1e-12);
        assert!((v + 30.0).abs() < 1e-12);
    }

    #[test]
    fn fringe_amplitude_is_visibility() {
        let f = fringe(3, 0.8, 0.0, 8).unwrap();
        assert!((f[1] + 0.8).abs() < 1e-12);
        assert!((f[9] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn levels_are_sorted() {
        let l = two_atom_levels("I", 10.0, 2.0, 3, 3).unwrap();
        assert_eq!(l.len(), 12);
        for row in l.chunks(4) {
            assert!(row[1] <= row[2] && row[2] <= row[3]);
        }
    }
}
