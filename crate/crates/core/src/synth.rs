//! Synthetic field generators for randomized property suites.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cutoff;
use crate::fft::SpectralOps;
use crate::field::Field;
use crate::grid::Grid;

/// A smooth random odd field with spectrum concentrated below `k_scale`,
/// compactly localized away from the domain boundary, spectrally low-passed
/// so it is fully resolved on the grid, and antisymmetrized. Deterministic
/// in `seed`.
pub fn random_odd_field(grid: Grid, seed: u64, k_scale: f64, amplitude: f64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n_points();
    let l = grid.half_length();
    let mut vals = vec![Complex64::new(0.0, 0.0); n];
    let n_waves = 24;
    for _ in 0..n_waves {
        let k = k_scale * (2.0 * rng.gen::<f64>() - 1.0);
        let phase = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
        let center = 0.4 * l * (rng.gen::<f64>() - 0.5);
        let width = l / 8.0 * (0.5 + rng.gen::<f64>());
        let amp = rng.gen::<f64>() - 0.5;
        for (j, x) in grid.points().enumerate() {
            let env = (-(x - center) * (x - center) / (2.0 * width * width)).exp();
            vals[j] += Complex64::from_polar(amp * env, k * x + phase);
        }
    }
    // compact support away from the periodic boundary
    for (j, x) in grid.points().enumerate() {
        vals[j] *= cutoff::chi_r_complement(x, 0.9 * l);
    }
    // spectral low-pass so the resolution check is satisfied by construction
    let ops = SpectralOps::new(grid);
    let mut spec = ops.to_spectrum(&vals);
    let k_cut = 0.2 * grid.nyquist();
    for (j, s) in spec.iter_mut().enumerate() {
        let r = grid.wavenumber(j).abs() / k_cut;
        *s *= (-r.powi(8)).exp();
    }
    let vals = ops.to_physical(&spec);
    let field = Field::new(grid, vals).expect("finite by construction");
    let odd = field.antisymmetrized();
    let sup = odd.sup_norm().max(f64::MIN_POSITIVE);
    odd.scaled(Complex64::new(amplitude / sup, 0.0)).antisymmetrized()
}

/// An odd pair of Gaussian packets at `+-x0`, boosted outward to wavenumber
/// `+-k0`.
pub fn gaussian_packet_odd(grid: Grid, x0: f64, width: f64, k0: f64) -> Field {
    Field::from_fn(grid, |x| {
        let right = (-(x - x0) * (x - x0) / (2.0 * width * width)).exp();
        let left = (-(x + x0) * (x + x0) / (2.0 * width * width)).exp();
        Complex64::from_polar(right, k0 * x) - Complex64::from_polar(left, -k0 * x)
    })
    .antisymmetrized()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_fields_are_odd_and_reproducible() {
        let grid = Grid::new(512, 30.0).unwrap();
        let a = random_odd_field(grid, 42, 2.0, 0.5);
        let b = random_odd_field(grid, 42, 2.0, 0.5);
        assert_eq!(a.values(), b.values());
        assert!(a.odd_sector());
        assert!(a.antisymmetry_defect() < 1e-14);
        let c = random_odd_field(grid, 43, 2.0, 0.5);
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn random_fields_are_resolved_and_boundary_clean() {
        for seed in 0..16u64 {
            let grid = Grid::new(1024, 40.0).unwrap();
            let f = random_odd_field(grid, seed, 3.0, 0.8);
            let ops = SpectralOps::new(grid);
            let tail = ops.tail_energy_fraction(f.values());
            assert!(tail < 1e-10, "seed {seed}: tail {tail}");
            assert!(
                f.boundary_magnitude() < 1e-13 * f.sup_norm(),
                "seed {seed}: boundary {}",
                f.boundary_magnitude()
            );
        }
    }

    #[test]
    fn packet_is_odd() {
        let grid = Grid::new(512, 40.0).unwrap();
        let f = gaussian_packet_odd(grid, 8.0, 1.5, 0.7);
        assert!(f.odd_sector());
        assert!(f.boundary_magnitude() < 1e-12);
    }
}
