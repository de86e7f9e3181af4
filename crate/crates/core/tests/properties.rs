//! Invariants of the optical operators and closed-form models.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rbcsim::cavity::{round_trip, CavityGeometry, CavityLoop};
use rbcsim::field::{Field, GridSpec};
use rbcsim::power::{
    calibrate_gain, factored_electrical_power, output_beam_power, output_electrical_power,
    threshold_power, GainPreset, LossSplit, PowerModelParams,
};
use rbcsim::ray::{cavity_is_stable, FtcrGeometry, StabilityVerdict};
use rbcsim::safety::{radiant_exposure, SafetyParams};
use rbcsim::wave::{
    apply_gain_aperture, apply_mirror, apply_thin_lens, ftcr_reflect, propagate, shift,
};

const LAM: f64 = 1.064e-6;

fn blobs(seed: u64, grid: GridSpec, spread: f64, width: (f64, f64)) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parts: Vec<(f64, f64, f64, Complex64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(-spread..spread),
                rng.gen_range(-spread..spread),
                rng.gen_range(width.0..width.1),
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            )
        })
        .collect();
    Field::from_fn(grid, LAM, |x, y| {
        parts
            .iter()
            .map(|&(cx, cy, w, a)| a * (-((x - cx).powi(2) + (y - cy).powi(2)) / (w * w)).exp())
            .sum()
    })
}

fn small_field(seed: u64) -> Field {
    blobs(seed, GridSpec::new(64, 4e-3).unwrap(), 0.6e-3, (0.2e-3, 0.5e-3))
}

fn rel_diff(a: &Field, b: &Field) -> f64 {
    let num: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = a.values.iter().map(|x| x.norm_sqr()).sum();
    (num / den).sqrt()
}

fn small_ftcr() -> FtcrGeometry {
    FtcrGeometry::new(50e-3, 52e-3, 1e-3).unwrap()
}

fn small_cavity(offset: [f64; 2]) -> CavityGeometry {
    CavityGeometry {
        tx_ftcr: small_ftcr(),
        rx_ftcr: small_ftcr(),
        gain_radius: 0.6e-3,
        reflectivity: 0.9,
        position: [0.0, 0.0, 0.2],
        displacement: [offset[0], offset[1], 0.0],
        wavelength: LAM,
    }
}

fn power_params() -> impl Strategy<Value = PowerModelParams> {
    (
        10.0..100.0f64,
        1e5..1e8f64,
        0.5..0.99f64,
        0.7..1.0f64,
        1e-3..5e-3f64,
        0.3..1.0f64,
        0.01..0.3f64,
        0.1..2.0f64,
    )
        .prop_map(|(pump_power, i_s, r, vs, rg, area_ratio, eta_pv, g0)| PowerModelParams {
            pump_power,
            saturation_intensity: i_s,
            reflectivity: r,
            optics_loss: vs,
            g0_lg: g0,
            gain_radius: rg,
            area_ratio,
            eta_pv,
            split: LossSplit::Symmetric,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn propagation_conserves_power(seed in any::<u64>(), d in 1e-3..2.0f64) {
        let f = small_field(seed);
        let p0 = f.total_power().unwrap();
        let p1 = propagate(&f, d).unwrap().total_power().unwrap();
        prop_assert!((p1 - p0).abs() / p0 < 1e-6);
    }

    #[test]
    fn propagation_composes(seed in any::<u64>(), k1 in 1u32..128, k2 in 1u32..128) {
        let (d1, d2) = (k1 as f64 / 64.0, k2 as f64 / 64.0);
        let f = small_field(seed);
        let two = propagate(&propagate(&f, d1).unwrap(), d2).unwrap();
        let one = propagate(&f, d1 + d2).unwrap();
        prop_assert!(rel_diff(&one, &two) < 1e-10);
    }

    #[test]
    fn shift_commutes_with_propagation(
        seed in any::<u64>(),
        d in 1e-3..1.0f64,
        sx in -0.9e-3..0.9e-3f64,
        sy in -0.9e-3..0.9e-3f64,
    ) {
        let f = small_field(seed);
        let a = propagate(&shift(&f, sx, sy).unwrap(), d).unwrap();
        let b = shift(&propagate(&f, d).unwrap(), sx, sy).unwrap();
        prop_assert!(rel_diff(&a, &b) < 1e-10);
    }

    #[test]
    fn shift_is_undone_by_opposite_shift(seed in any::<u64>(), sx in -0.9e-3..0.9e-3f64, sy in -0.9e-3..0.9e-3f64) {
        let f = small_field(seed);
        let back = shift(&shift(&f, sx, sy).unwrap(), -sx, -sy).unwrap();
        prop_assert!(rel_diff(&f, &back) < 1e-10);
    }

    #[test]
    fn opposite_lenses_cancel(seed in any::<u64>(), focal in 0.5..5.0f64) {
        let f = small_field(seed);
        let radius = f.grid.window();
        let back = apply_thin_lens(&apply_thin_lens(&f, focal, radius).unwrap(), -focal, radius).unwrap();
        prop_assert!(rel_diff(&f, &back) < 1e-10);
    }

    #[test]
    fn gaussian_width_follows_free_space_law(d in 0.1..2.0f64) {
        let w0 = 0.5e-3;
        let zr = std::f64::consts::PI * w0 * w0 / LAM;
        let f = Field::gaussian(GridSpec::new(128, 12e-3).unwrap(), LAM, w0, 0.0, 0.0);
        let w = std::f64::consts::SQRT_2 * propagate(&f, d).unwrap().rms_radius().unwrap();
        let expected = w0 * (1.0 + (d / zr).powi(2)).sqrt();
        prop_assert!((w - expected).abs() / expected < 0.01);
    }

    #[test]
    fn retroreflector_is_passive(seed in any::<u64>()) {
        let f = blobs(seed, GridSpec::new(256, 6e-3).unwrap(), 0.8e-3, (0.2e-3, 0.6e-3));
        let out = ftcr_reflect(&f, &small_ftcr()).unwrap();
        prop_assert!(out.total_power().unwrap() <= f.total_power().unwrap() * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn round_trip_is_passive(seed in any::<u64>(), ox in -1e-3..1e-3f64) {
        let geom = small_cavity([ox, 0.0]);
        let f = blobs(seed, GridSpec::new(128, 6e-3).unwrap(), 0.6e-3, (0.2e-3, 0.6e-3));
        let out = round_trip(&f, &geom).unwrap();
        prop_assert!(out.total_power().unwrap() <= f.total_power().unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn leg_losses_multiply_to_round_trip(seed in any::<u64>(), ox in -1e-3..1e-3f64) {
        let geom = small_cavity([ox, 0.0]);
        let grid = GridSpec::new(128, 6e-3).unwrap();
        let f = blobs(seed, grid, 0.6e-3, (0.2e-3, 0.6e-3));
        let lp = CavityLoop::with_legs(&geom, &grid).unwrap();
        let legs = lp.loss_factors(&f).unwrap();
        let ratio = lp.round_trip(&f).unwrap().total_power().unwrap() / f.total_power().unwrap();
        prop_assert!((legs.product() - ratio).abs() <= 1e-6 * ratio.max(1e-300));
        for v in [legs.tx_to_gain, legs.gain_to_rx, legs.rx_to_gain, legs.gain_to_tx] {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
        }
    }

    #[test]
    fn lateral_axes_are_equivalent(a in 0.0..1e-3f64) {
        let grid = GridSpec::new(128, 6e-3).unwrap();
        let f = Field::gaussian(grid, LAM, 0.3e-3, 0.0, 0.0);
        let px = round_trip(&f, &small_cavity([a, 0.0])).unwrap().total_power().unwrap();
        let py = round_trip(&f, &small_cavity([0.0, a])).unwrap().total_power().unwrap();
        prop_assert!((px - py).abs() <= 1e-9 * px.max(py));
    }
}

#[test]
fn half_area_gain_aperture_halves_uniform_power() {
    let grid = GridSpec::new(256, 10e-3).unwrap();
    let f = Field::from_fn(grid, LAM, |_, _| Complex64::new(1.0, 0.0));
    let radius = grid.window() / (2.0 * std::f64::consts::PI).sqrt();
    let ratio = apply_gain_aperture(&f, radius).unwrap().total_power().unwrap() / f.total_power().unwrap();
    assert!((ratio - 0.5).abs() < 0.01, "{ratio}");
}

#[test]
fn narrow_gaussian_passes_mirror_losslessly() {
    let radius = 1e-3;
    let grid = GridSpec::new(128, 4e-3).unwrap();
    let f = Field::gaussian(grid, LAM, radius / 4.0, 0.0, 0.0);
    let loss = 1.0 - apply_mirror(&f, radius).unwrap().total_power().unwrap() / f.total_power().unwrap();
    assert!(loss < 1e-6, "{loss}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn factored_matrix_matches_element_product(
        focal in 0.01..0.5f64,
        excess in 0.0..0.2f64,
        radius in 1e-3..3e-2f64,
    ) {
        let g = FtcrGeometry::new(focal, focal * (1.0 + excess), radius).unwrap();
        let explicit = g.matrix_explicit().unwrap();
        prop_assert!(explicit.max_abs_diff(&g.matrix().unwrap()) <= 1e-12 * (1.0 + explicit.c.abs()));
        prop_assert!((explicit.determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn stability_is_lost_once(focal in 0.02..0.2f64, excess in 1e-4..0.1f64) {
        let g = FtcrGeometry::new(focal, focal * (1.0 + excess), 7e-3).unwrap();
        let mut lost = false;
        for i in 1..=200 {
            let stable = matches!(cavity_is_stable(&g, &g, 0.05 * i as f64).unwrap(), StabilityVerdict::Stable { .. });
            prop_assert!(!(lost && stable));
            lost |= !stable;
        }
    }

    #[test]
    fn factored_power_matches_direct(p in power_params(), eta in 0.6..1.0f64) {
        let direct = output_electrical_power(eta, &p).unwrap();
        let factored = factored_electrical_power(eta, &p).unwrap();
        prop_assert!((direct - factored).abs() <= 1e-9 * direct.max(1e-12));
    }

    #[test]
    fn calibration_reproduces_target(p in power_params(), target in 0.1..50.0f64) {
        let g0 = calibrate_gain(&p, target).unwrap();
        let calibrated = PowerModelParams { g0_lg: g0, ..p };
        let got = output_beam_power(1.0, &calibrated).unwrap();
        prop_assert!((got - target).abs() <= 1e-9 * target);
    }

    #[test]
    fn threshold_falls_with_efficiency(p in power_params(), a in 0.01..1.0f64, b in 0.01..1.0f64) {
        prop_assume!(a != b);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(threshold_power(hi, &p).unwrap() < threshold_power(lo, &p).unwrap());
    }

    #[test]
    fn beam_power_rises_with_efficiency(p in power_params(), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let plo = output_beam_power(lo, &p).unwrap();
        let phi = output_beam_power(hi, &p).unwrap();
        prop_assert!(phi >= plo * (1.0 - 1e-12));
    }

    #[test]
    fn beam_power_scales_with_overlap(p in power_params(), eta in 0.5..1.0f64) {
        let half = PowerModelParams { area_ratio: p.area_ratio / 2.0, ..p };
        let full = output_beam_power(eta, &p).unwrap();
        let reduced = output_beam_power(eta, &half).unwrap();
        prop_assert!((full - 2.0 * reduced).abs() <= 1e-12 * full.max(1e-300));
    }

    #[test]
    fn exposure_is_linear_in_output(po in 0.0..100.0f64, k in 0.0..10.0f64) {
        let base = SafetyParams { output_power: po, ..SafetyParams::baseline() };
        let scaled = SafetyParams { output_power: po * k, ..base };
        let a = radiant_exposure(&base).unwrap();
        let b = radiant_exposure(&scaled).unwrap();
        prop_assert!((b.radiant_exposure - k * a.radiant_exposure).abs() <= 1e-12 * b.radiant_exposure.max(1e-300));
        if b.compliant && k >= 1.0 {
            prop_assert!(a.compliant);
        }
    }
}

#[test]
fn presets_sit_on_either_side_of_threshold() {
    let lasing = PowerModelParams::baseline(GainPreset::Calibrated);
    let dim = PowerModelParams::baseline(GainPreset::RatedExcitation);
    assert!(output_beam_power(1.0, &lasing).unwrap() > 0.0);
    assert_eq!(output_beam_power(1.0, &dim).unwrap(), 0.0);
}
