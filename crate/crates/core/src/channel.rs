//! Small-scale channel synthesis.
//!
//! User links (`H_d`, `H_I`) are far-field Rayleigh rows scaled by their
//! large-scale gain. The AP-IRS link `G` is Rician: a deterministic
//! near-field LOS term built from exact element distances plus an i.i.d.
//! Rayleigh scatter term, mixed per AP antenna by the Rician factor.

use std::io::Write;

use rand::Rng;

use crate::cplx::{circular_gaussian, CMat, C64};
use crate::error::{Error, Result};
use crate::scenario::{LargeScale, Placement};

/// One realization of every small-scale channel in the scenario.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    /// AP to IRS, `N_D x N_A`.
    pub g: CMat,
    /// IRS to users, `K x N_D`; row k is `h_{I,k}`.
    pub h_i: CMat,
    /// AP to users, `K x N_A`; row k is `h_{d,k}`.
    pub h_d: CMat,
    pub large_scale: LargeScale,
}

impl ChannelSet {
    pub fn k(&self) -> usize {
        self.h_d.nrows()
    }

    pub fn n_a(&self) -> usize {
        self.h_d.ncols()
    }

    pub fn n_d(&self) -> usize {
        self.g.nrows()
    }

    pub fn is_finite(&self) -> bool {
        [&self.g, &self.h_i, &self.h_d]
            .iter()
            .all(|m| m.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }
}

fn rayleigh_rows<R: Rng + ?Sized>(gains: &[f64], cols: usize, rng: &mut R) -> CMat {
    let mut m = CMat::zeros(gains.len(), cols);
    for (k, &l) in gains.iter().enumerate() {
        let amp = l.sqrt();
        for c in 0..cols {
            m[(k, c)] = circular_gaussian(rng) * amp;
        }
    }
    m
}

/// `H_d`: row k is `sqrt(L_{d,k})` times a CN(0, I) row.
pub fn sample_direct_channel<R: Rng + ?Sized>(
    placement: &Placement,
    large_scale: &LargeScale,
    rng: &mut R,
) -> CMat {
    rayleigh_rows(&large_scale.l_d, placement.ap_antennas.len(), rng)
}

/// `H_I`: row k is `sqrt(L_{I,k})` times a CN(0, I) row.
pub fn sample_dirs_lu_channel<R: Rng + ?Sized>(
    placement: &Placement,
    large_scale: &LargeScale,
    rng: &mut R,
) -> CMat {
    rayleigh_rows(&large_scale.l_i, placement.dirs_elements.len(), rng)
}

/// Near-field LOS coefficient between element `r` and antenna `n`
/// (zero-based), `exp(-j 2 pi / lambda (D_n^r - D_n))` where `D_n` is the
/// distance from antenna `n` to the IRS deployment point.
pub fn los_element(placement: &Placement, r: usize, n: usize, wavelength: f64) -> Result<C64> {
    let elem = placement
        .dirs_elements
        .get(r)
        .ok_or_else(|| Error::IndexOutOfRange(format!("element {r} of {}", placement.dirs_elements.len())))?;
    let ant = placement
        .ap_antennas
        .get(n)
        .ok_or_else(|| Error::IndexOutOfRange(format!("antenna {n} of {}", placement.ap_antennas.len())))?;
    let d_nr = nalgebra::distance(ant, elem);
    let d_n = nalgebra::distance(ant, &placement.dirs_origin());
    Ok(path_phase(d_nr - d_n, wavelength))
}

#[inline]
fn path_phase(delta: f64, wavelength: f64) -> C64 {
    C64::from_polar(1.0, -std::f64::consts::TAU / wavelength * delta)
}

/// Full `N_D x N_A` LOS matrix. Depends only on the two arrays, so callers
/// running many realizations over one geometry should build it once.
pub fn los_matrix(placement: &Placement, wavelength: f64) -> CMat {
    let irs0 = placement.dirs_origin();
    let d_n: Vec<f64> = placement.ap_antennas.iter().map(|a| nalgebra::distance(a, &irs0)).collect();
    CMat::from_fn(placement.dirs_elements.len(), placement.ap_antennas.len(), |r, n| {
        let d_nr = nalgebra::distance(&placement.ap_antennas[n], &placement.dirs_elements[r]);
        path_phase(d_nr - d_n[n], wavelength)
    })
}

/// LOS and scatter amplitudes for one Rician factor.
fn rician_weights(eps: f64) -> Result<(f64, f64)> {
    if !(eps >= 0.0) {
        return Err(Error::NegativeRicianFactor(eps));
    }
    if eps.is_infinite() {
        return Ok((1.0, 0.0));
    }
    Ok(((eps / (eps + 1.0)).sqrt(), (1.0 / (eps + 1.0)).sqrt()))
}

/// `G = sqrt(L_G) (G_los sqrt(Z (Z+I)^-1) + G_nlos sqrt((Z+I)^-1))` with a
/// precomputed LOS matrix.
pub fn sample_ap_dirs_channel_with_los<R: Rng + ?Sized>(
    los: &CMat,
    l_g: f64,
    rician: &[f64],
    rng: &mut R,
) -> Result<CMat> {
    if rician.len() != los.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} Rician factors for {} antennas",
            rician.len(),
            los.ncols()
        )));
    }
    let amp = l_g.sqrt();
    let mut g = CMat::zeros(los.nrows(), los.ncols());
    for (n, &eps) in rician.iter().enumerate() {
        let (w_los, w_nlos) = rician_weights(eps)?;
        for r in 0..los.nrows() {
            let scatter = circular_gaussian(rng);
            g[(r, n)] = (los[(r, n)] * w_los + scatter * w_nlos) * amp;
        }
    }
    Ok(g)
}

pub fn sample_ap_dirs_channel<R: Rng + ?Sized>(
    placement: &Placement,
    large_scale: &LargeScale,
    rician: &[f64],
    wavelength: f64,
    rng: &mut R,
) -> Result<CMat> {
    let los = los_matrix(placement, wavelength);
    sample_ap_dirs_channel_with_los(&los, large_scale.l_g, rician, rng)
}

/// Draw `H_d`, `H_I` and `G` in that order from one stream.
pub fn sample_channels<R: Rng + ?Sized>(
    placement: &Placement,
    large_scale: &LargeScale,
    los: &CMat,
    rician: &[f64],
    rng: &mut R,
) -> Result<ChannelSet> {
    let h_d = sample_direct_channel(placement, large_scale, rng);
    let h_i = sample_dirs_lu_channel(placement, large_scale, rng);
    let g = sample_ap_dirs_channel_with_los(los, large_scale.l_g, rician, rng)?;
    Ok(ChannelSet { g, h_i, h_d, large_scale: large_scale.clone() })
}

/// Debug dump: one `matrix,row,col,re,im` line per entry.
pub fn write_channel_csv<W: Write>(set: &ChannelSet, mut out: W) -> Result<()> {
    writeln!(out, "matrix,row,col,re,im")?;
    for (name, m) in [("G", &set.g), ("H_I", &set.h_i), ("H_d", &set.h_d)] {
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let z = m[(r, c)];
                writeln!(out, "{name},{r},{c},{:e},{:e}", z.re, z.im)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{build_scenario, large_scale, ScenarioConfig};
    use nalgebra::Point3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy_placement(n_a: usize, n_d: usize) -> Placement {
        let cfg = ScenarioConfig {
            k: 1,
            n_a,
            n_d,
            rician_factors: vec![10.0; n_a],
            ..Default::default()
        };
        build_scenario(&cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap()
    }

    fn unit_ls(k: usize) -> LargeScale {
        LargeScale { l_g: 1.0, l_i: vec![1.0; k], l_d: vec![1.0; k] }
    }

    #[test]
    fn zero_gain_gives_zero_row() {
        let p = toy_placement(4, 3);
        let ls = LargeScale { l_g: 1.0, l_i: vec![0.0], l_d: vec![0.0] };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_direct_channel(&p, &ls, &mut rng).iter().all(|z| *z == C64::new(0.0, 0.0)));
        assert!(sample_dirs_lu_channel(&p, &ls, &mut rng).iter().all(|z| *z == C64::new(0.0, 0.0)));
    }

    /// Draw `trials` single-entry channels and return (mean, variance,
    /// standard error of the mean).
    fn moments(trials: usize, mut draw: impl FnMut(&mut ChaCha8Rng) -> C64) -> (C64, f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let xs: Vec<C64> = (0..trials).map(|_| draw(&mut rng)).collect();
        let n = trials as f64;
        let mean = xs.iter().sum::<C64>() / n;
        let var = xs.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
        (mean, var, (var / n).sqrt())
    }

    #[test]
    fn rayleigh_moments() {
        let p = toy_placement(1, 1);
        let ls = unit_ls(1);
        for which in 0..2 {
            let (mean, var, se) = moments(100_000, |rng| {
                if which == 0 {
                    sample_direct_channel(&p, &ls, rng)[(0, 0)]
                } else {
                    sample_dirs_lu_channel(&p, &ls, rng)[(0, 0)]
                }
            });
            assert!((var - 1.0).abs() < 0.03, "variance {var}");
            assert!(mean.norm() < 3.0 * se, "mean {mean}");
        }
    }

    #[test]
    fn direct_entries_uncorrelated() {
        let p = toy_placement(2, 1);
        let ls = unit_ls(1);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 100_000;
        let mut acc = C64::new(0.0, 0.0);
        for _ in 0..n {
            let h = sample_direct_channel(&p, &ls, &mut rng);
            acc += h[(0, 0)] * h[(0, 1)].conj();
        }
        // each product has unit variance, so the mean has std 1/sqrt(n)
        assert!((acc / n as f64).norm() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn los_unit_modulus_and_reference() {
        let p = toy_placement(3, 8);
        for r in 0..8 {
            for n in 0..3 {
                let z = los_element(&p, r, n, 0.05).unwrap();
                assert!((z.norm() - 1.0).abs() < 1e-14);
            }
        }
        // element 0 is the IRS deployment point: zero path difference
        for n in 0..3 {
            let z = los_element(&p, 0, n, 0.05).unwrap();
            assert!((z - C64::new(1.0, 0.0)).norm() < 1e-14);
        }
        assert!(los_element(&p, 8, 0, 0.05).is_err());
        assert!(los_element(&p, 0, 3, 0.05).is_err());
        let m = los_matrix(&p, 0.05);
        assert!((m[(5, 2)] - los_element(&p, 5, 2, 0.05).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn half_wavelength_path_difference_flips_sign() {
        // element placed lambda/2 farther from the antenna than the IRS origin
        let lambda = 0.05;
        let p = Placement {
            ap_antennas: vec![Point3::new(0.0, 0.0, 5.0)],
            dirs_elements: vec![Point3::new(-2.0, 0.0, 5.0), Point3::new(-2.0 - lambda / 2.0, 0.0, 5.0)],
            lu_positions: vec![],
        };
        let z = los_element(&p, 1, 0, lambda).unwrap();
        assert!((z - C64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn pure_los_limit_is_deterministic() {
        let p = toy_placement(2, 4);
        let ls = LargeScale { l_g: 0.25, ..unit_ls(1) };
        let los = los_matrix(&p, 0.05);
        let g = sample_ap_dirs_channel(&p, &ls, &[1e12, 1e12], 0.05, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        for (a, b) in g.iter().zip(los.iter()) {
            assert!((a - b * 0.5).norm() < 1e-5);
        }
        let inf = sample_ap_dirs_channel(&p, &ls, &[f64::INFINITY; 2], 0.05, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert!(inf.iter().zip(los.iter()).all(|(a, b)| (a - b * 0.5).norm() < 1e-15));
    }

    #[test]
    fn rician_power_normalization() {
        let p = toy_placement(1, 3);
        let l_g = 0.3;
        let los = los_matrix(&p, 0.05);
        for eps in [0.0, 1.0, 10.0] {
            let (_, var, _) = moments(100_000, |rng| {
                sample_ap_dirs_channel_with_los(&los, l_g, &[eps], rng).unwrap()[(2, 0)]
            });
            // variance about the LOS mean, plus the LOS power
            let second_moment = var + l_g * eps / (eps + 1.0);
            assert!((second_moment / l_g - 1.0).abs() < 0.03, "eps {eps}: {second_moment}");
        }
    }

    #[test]
    fn rejects_negative_rician() {
        let p = toy_placement(2, 2);
        let ls = unit_ls(1);
        let err = sample_ap_dirs_channel(&p, &ls, &[10.0, -1.0], 0.05, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(err, Err(Error::NegativeRicianFactor(_))));
    }

    #[test]
    fn deterministic_under_seed() {
        let cfg = ScenarioConfig { n_d: 64, ..Default::default() };
        let p = build_scenario(&cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let ls = large_scale(&p).unwrap();
        let los = los_matrix(&p, cfg.wavelength);
        let a = sample_channels(&p, &ls, &los, &cfg.rician_factors, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = sample_channels(&p, &ls, &los, &cfg.rician_factors, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a.g, b.g);
        assert_eq!(a.h_i, b.h_i);
        assert_eq!(a.h_d, b.h_d);
        assert!(a.is_finite());
        assert_eq!((a.k(), a.n_a(), a.n_d()), (12, 16, 64));
    }

    #[test]
    fn csv_dump_has_every_entry() {
        let cfg = ScenarioConfig { k: 2, n_a: 2, n_d: 3, rician_factors: vec![10.0; 2], ..Default::default() };
        let p = build_scenario(&cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let ls = large_scale(&p).unwrap();
        let los = los_matrix(&p, cfg.wavelength);
        let set = sample_channels(&p, &ls, &los, &cfg.rician_factors, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let mut buf = Vec::new();
        write_channel_csv(&set, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 6 + 6 + 4);
        assert!(text.starts_with("matrix,row,col,re,im\nG,0,0,"));
    }
}
