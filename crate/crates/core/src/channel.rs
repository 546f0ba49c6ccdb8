//! Air-to-ground channel model: LoS probability, pathloss, Shannon rates.
//!
//! All operations here are pure functions of their arguments. Powers are in
//! dBm, losses in dB, bandwidths in Hz and rates in bps throughout; callers
//! convert to Mbps only at I/O boundaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Default receiver noise power spectral density in dBm/Hz (thermal floor at
/// ~290 K). The noise power over a bandwidth `B` is
/// `noise_density + 10 log10 B + omega_n` dBm.
pub const DEFAULT_NOISE_DENSITY_DBM_HZ: f64 = -174.0;

/// Environment and radio constants of the channel model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Environment constant of the sigmoid LoS-probability model.
    pub alpha: f64,
    /// Environment constant (per degree of elevation).
    pub beta: f64,
    /// Pathloss exponent.
    pub eta: f64,
    /// Excess pathloss under LoS, dB.
    pub mu_los_db: f64,
    /// Excess pathloss under NLoS, dB.
    pub mu_nlos_db: f64,
    /// Carrier frequency, Hz.
    pub f_c_hz: f64,
    /// UAV transmit power, dBm.
    pub p_d_dbm: f64,
    /// GBS transmit power, dBm.
    pub p_g_dbm: f64,
    /// Receiver noise figure, dB.
    pub omega_n_db: f64,
    /// Noise power spectral density, dBm/Hz.
    #[serde(default = "default_noise_density")]
    pub noise_density_dbm_hz: f64,
}

fn default_noise_density() -> f64 {
    DEFAULT_NOISE_DENSITY_DBM_HZ
}

impl ChannelParams {
    /// Suburban parameter set: eta 2.5, alpha 4.88, beta 0.43,
    /// mu_los 0.1 dB, mu_nlos 21 dB, f_c 2 GHz, p_d 36 dBm, p_g 46 dBm,
    /// noise figure 6 dB.
    pub fn suburban() -> Self {
        ChannelParams {
            alpha: 4.88,
            beta: 0.43,
            eta: 2.5,
            mu_los_db: 0.1,
            mu_nlos_db: 21.0,
            f_c_hz: 2.0e9,
            p_d_dbm: 36.0,
            p_g_dbm: 46.0,
            omega_n_db: 6.0,
            noise_density_dbm_hz: DEFAULT_NOISE_DENSITY_DBM_HZ,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks: [(&str, bool); 5] = [
            ("alpha", self.alpha > 0.0),
            ("beta", self.beta > 0.0),
            ("eta", self.eta > 0.0),
            ("mu_nlos_db", self.mu_nlos_db >= self.mu_los_db),
            ("f_c_hz", self.f_c_hz > 0.0),
        ];
        for (name, ok) in checks {
            if !ok {
                return Err(Error::validation(
                    format!("channel.{name}"),
                    "channel parameter out of range",
                ));
            }
        }
        Ok(())
    }

    /// Free-space constant `A = 10 eta log10(4 pi f_c / c) + mu_nlos` (dB).
    pub fn const_a_db(&self) -> f64 {
        10.0 * self.eta * (4.0 * std::f64::consts::PI * self.f_c_hz / SPEED_OF_LIGHT_M_S).log10()
            + self.mu_nlos_db
    }

    /// Excess-loss swing `B = mu_los - mu_nlos` (dB, nonpositive in practice).
    pub fn const_b_db(&self) -> f64 {
        self.mu_los_db - self.mu_nlos_db
    }
}

/// A point in 3-D space; `h` is the altitude above ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub h: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, h: f64) -> Self {
        Point3 { x, y, h }
    }

    pub fn ground(x: f64, y: f64) -> Self {
        Point3 { x, y, h: 0.0 }
    }

    /// Horizontal (ground-projected) distance.
    pub fn horizontal_distance(&self, other: &Point3) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }

    /// Euclidean 3-D distance.
    pub fn distance(&self, other: &Point3) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.h - other.h).powi(2))
            .sqrt()
    }
}

/// Elevation angle from `ground` to `uav`, in degrees within `[0, 90]`.
///
/// Defined as 90 degrees when the UAV is directly overhead; errors when the
/// two points coincide.
pub fn elevation_angle(uav: &Point3, ground: &Point3) -> Result<f64> {
    let r = uav.horizontal_distance(ground);
    let dh = (uav.h - ground.h).abs();
    if r == 0.0 && dh == 0.0 {
        return Err(Error::UndefinedGeometry(
            "elevation angle of coincident points".into(),
        ));
    }
    if r == 0.0 {
        return Ok(90.0);
    }
    Ok((dh / r).atan().to_degrees())
}

/// LoS probability `1 / (1 + alpha exp(-beta (theta - alpha)))` for an
/// elevation angle `theta` in degrees.
pub fn p_los(params: &ChannelParams, theta_deg: f64) -> f64 {
    1.0 / (1.0 + params.alpha * (-params.beta * (theta_deg - params.alpha)).exp())
}

/// Pathloss of the UAV-user link in dB:
/// `A + 10 eta log10 d + B * P_los(theta)`.
pub fn pathloss_user(params: &ChannelParams, uav: &Point3, user: &Point3) -> Result<f64> {
    let d = uav.distance(user);
    if d == 0.0 {
        return Err(Error::UndefinedGeometry("pathloss at zero distance".into()));
    }
    let theta = elevation_angle(uav, user)?;
    Ok(params.const_a_db() + 10.0 * params.eta * d.log10() + params.const_b_db() * p_los(params, theta))
}

/// Pathloss of the UAV-GBS backhaul link in dB. The backhaul is assumed to
/// always be LoS, so this is `pathloss_user` with `P_los` forced to 1.
pub fn pathloss_gbs(params: &ChannelParams, uav: &Point3, gbs: &Point3) -> Result<f64> {
    let d = uav.distance(gbs);
    if d == 0.0 {
        return Err(Error::UndefinedGeometry("pathloss at zero distance".into()));
    }
    Ok(params.const_a_db() + 10.0 * params.eta * d.log10() + params.const_b_db())
}

/// Linear SNR-bandwidth product `Theta` in Hz, such that the linear SNR over
/// a bandwidth `B` is `Theta / B`.
///
/// `Theta = 10^[(p - L - omega_n - n0) / 10]` where `p` is the transmit power
/// in dBm, `L` the pathloss in dB and `n0` the noise density in dBm/Hz.
pub fn snr_bandwidth_product(params: &ChannelParams, tx_power_dbm: f64, loss_db: f64) -> f64 {
    10f64.powf(
        (tx_power_dbm - loss_db - params.omega_n_db - params.noise_density_dbm_hz) / 10.0,
    )
}

/// Shannon rate `B log2(1 + Theta/B)` in bps for a user link with the given
/// allocated bandwidth.
pub fn data_rate(params: &ChannelParams, uav: &Point3, user: &Point3, bandwidth_hz: f64) -> Result<f64> {
    if bandwidth_hz <= 0.0 {
        return Err(Error::Domain(format!(
            "bandwidth must be positive, got {bandwidth_hz}"
        )));
    }
    let loss = pathloss_user(params, uav, user)?;
    let theta = snr_bandwidth_product(params, params.p_d_dbm, loss);
    Ok(bandwidth_hz * (1.0 + theta / bandwidth_hz).log2())
}

/// Backhaul capacity in bps when the GBS lends `b_g_hz` of bandwidth.
pub fn backhaul_capacity(params: &ChannelParams, uav: &Point3, gbs: &Point3, b_g_hz: f64) -> Result<f64> {
    if b_g_hz <= 0.0 {
        return Err(Error::Domain(format!(
            "backhaul bandwidth must be positive, got {b_g_hz}"
        )));
    }
    let loss = pathloss_gbs(params, uav, gbs)?;
    let theta = snr_bandwidth_product(params, params.p_g_dbm, loss);
    Ok(b_g_hz * (1.0 + theta / b_g_hz).log2())
}

/// Index and capacity of the GBS offering the highest backhaul capacity from
/// `uav`. Ties resolve to the lowest index.
pub fn best_gbs(params: &ChannelParams, uav: &Point3, gbss: &[(Point3, f64)]) -> Result<(usize, f64)> {
    if gbss.is_empty() {
        return Err(Error::Domain("no ground base stations".into()));
    }
    let mut best = (0usize, f64::NEG_INFINITY);
    for (j, (pos, b_g)) in gbss.iter().enumerate() {
        let cap = backhaul_capacity(params, uav, pos, *b_g)?;
        if cap > best.1 {
            best = (j, cap);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> ChannelParams {
        ChannelParams::suburban()
    }

    #[test]
    fn elevation_equal_legs_is_45_degrees() {
        let uav = Point3::new(0.0, 0.0, 100.0);
        let user = Point3::ground(100.0, 0.0);
        assert_relative_eq!(elevation_angle(&uav, &user).unwrap(), 45.0);
    }

    #[test]
    fn elevation_overhead_is_90_degrees() {
        let uav = Point3::new(5.0, 5.0, 100.0);
        let user = Point3::ground(5.0, 5.0);
        assert_relative_eq!(elevation_angle(&uav, &user).unwrap(), 90.0);
    }

    #[test]
    fn elevation_generic_matches_scalar_arctan() {
        // Independent oracle: plain scalar arctan of dh/r.
        let uav = Point3::new(0.0, 0.0, 50.0);
        let user = Point3::ground(150.0, 0.0);
        let expected = (50.0f64 / 150.0).atan() * 180.0 / std::f64::consts::PI;
        assert_relative_eq!(elevation_angle(&uav, &user).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn elevation_of_coincident_points_errors() {
        let p = Point3::new(1.0, 2.0, 3.0);
        assert!(matches!(
            elevation_angle(&p, &p),
            Err(Error::UndefinedGeometry(_))
        ));
    }

    #[test]
    fn p_los_at_theta_equal_alpha() {
        let p = params();
        assert_relative_eq!(p_los(&p, p.alpha), 1.0 / (1.0 + p.alpha), epsilon = 1e-12);
    }

    #[test]
    fn p_los_at_45_degrees_near_one() {
        // Direct evaluation of the sigmoid with alpha=4.88, beta=0.43.
        let p = params();
        let expected = 1.0 / (1.0 + 4.88 * (-0.43f64 * (45.0 - 4.88)).exp());
        let got = p_los(&p, 45.0);
        assert_relative_eq!(got, expected, epsilon = 1e-12);
        assert!(got > 0.9999, "got {got}");
    }

    #[test]
    fn p_los_at_zero_closed_form() {
        let p = params();
        let expected = 1.0 / (1.0 + p.alpha * (p.alpha * p.beta).exp());
        assert_relative_eq!(p_los(&p, 0.0), expected, epsilon = 1e-12);
    }

    #[test]
    fn p_los_bounded_and_strictly_increasing() {
        let p = params();
        let mut prev = -1.0;
        for deg in 0..=90 {
            let v = p_los(&p, deg as f64);
            assert!(v > 0.0 && v < 1.0, "p_los({deg}) = {v}");
            assert!(v > prev, "not increasing at {deg}");
            prev = v;
        }
    }

    #[test]
    fn pathloss_identity_when_log_term_vanishes() {
        // At d = c / (4 pi f_c), the free-space log term is zero, so
        // L = mu_nlos + B * P_los(theta).
        let p = params();
        let d = SPEED_OF_LIGHT_M_S / (4.0 * std::f64::consts::PI * p.f_c_hz);
        // Place the user at horizontal offset r and height difference dh
        // with r^2 + dh^2 = d^2.
        let dh = d * 0.6;
        let r = (d * d - dh * dh).sqrt();
        let uav = Point3::new(0.0, 0.0, dh);
        let user = Point3::ground(r, 0.0);
        let theta = elevation_angle(&uav, &user).unwrap();
        let expected = p.mu_nlos_db + p.const_b_db() * p_los(&p, theta);
        assert_relative_eq!(pathloss_user(&p, &uav, &user).unwrap(), expected, epsilon = 1e-9);
    }

    #[test]
    fn pathloss_user_term_by_term_oracle() {
        // Spreadsheet-style independent evaluation of each term.
        let p = params();
        let uav = Point3::new(0.0, 0.0, 100.0);
        let user = Point3::ground(100.0, 0.0);
        let d = (100.0f64 * 100.0 + 100.0 * 100.0).sqrt();
        let theta = 45.0;
        let a = 10.0 * 2.5 * (4.0 * std::f64::consts::PI * 2.0e9 / 299_792_458.0).log10() + 21.0;
        let b = 0.1 - 21.0;
        let plos = 1.0 / (1.0 + 4.88 * (-0.43f64 * (theta - 4.88)).exp());
        let expected = a + 10.0 * 2.5 * d.log10() + b * plos;
        assert_relative_eq!(pathloss_user(&p, &uav, &user).unwrap(), expected, epsilon = 1e-9);
    }

    #[test]
    fn pathloss_independent_of_angle_when_excess_losses_equal() {
        let mut p = params();
        p.mu_los_db = p.mu_nlos_db;
        let user = Point3::ground(100.0, 0.0);
        let d = 200.0;
        // Two geometries with the same distance but different elevation.
        let uav_high = Point3::new(100.0, 0.0, d);
        let dh = 50.0;
        let r = (d * d - dh * dh).sqrt();
        let uav_low = Point3::new(100.0 + r, 0.0, dh);
        let l1 = pathloss_user(&p, &uav_high, &user).unwrap();
        let l2 = pathloss_user(&p, &uav_low, &user).unwrap();
        assert_relative_eq!(l1, l2, epsilon = 1e-9);
    }

    #[test]
    fn pathloss_monotone_along_fixed_elevation_ray() {
        let p = params();
        let user = Point3::ground(0.0, 0.0);
        let mut prev = f64::NEG_INFINITY;
        // 45-degree ray: equal horizontal offset and height.
        for step in 1..=50 {
            let t = step as f64 * 10.0;
            let uav = Point3::new(t, 0.0, t);
            let l = pathloss_user(&p, &uav, &user).unwrap();
            assert!(l > prev, "pathloss not increasing at distance step {step}");
            prev = l;
        }
    }

    #[test]
    fn pathloss_gbs_is_user_pathloss_with_forced_los() {
        let p = params();
        let uav = Point3::new(0.0, 0.0, 100.0);
        let gbs = Point3::ground(500.0, 500.0);
        let d = uav.distance(&gbs);
        let expected = p.const_a_db() + 10.0 * p.eta * d.log10() + p.const_b_db();
        assert_relative_eq!(pathloss_gbs(&p, &uav, &gbs).unwrap(), expected, epsilon = 1e-9);
    }

    #[test]
    fn pathloss_gbs_at_unit_distance() {
        let p = params();
        let uav = Point3::new(0.0, 0.0, 1.0);
        let gbs = Point3::ground(0.0, 0.0);
        assert_relative_eq!(
            pathloss_gbs(&p, &uav, &gbs).unwrap(),
            p.const_a_db() + p.const_b_db(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn data_rate_vanishes_as_bandwidth_vanishes() {
        let p = params();
        let uav = Point3::new(0.0, 0.0, 100.0);
        let user = Point3::ground(50.0, 0.0);
        let r = data_rate(&p, &uav, &user, 1e-6).unwrap();
        assert!(r < 1e-3, "rate at ~zero bandwidth should vanish, got {r}");
    }

    #[test]
    fn data_rate_strictly_concave_through_origin() {
        let p = params();
        let uav = Point3::new(0.0, 0.0, 100.0);
        let user = Point3::ground(50.0, 0.0);
        let b = 1.0e6;
        let r1 = data_rate(&p, &uav, &user, b).unwrap();
        let r2 = data_rate(&p, &uav, &user, 2.0 * b).unwrap();
        assert!(r2 < 2.0 * r1);
        assert!(r2 > r1);
    }

    #[test]
    fn data_rate_two_step_hand_calculation() {
        // Oracle: compute the SNR in dB by hand, then apply Shannon's formula.
        let p = params();
        let uav = Point3::new(0.0, 0.0, 100.0);
        let user = Point3::ground(50.0, 0.0);
        let bw = 1.0e6_f64;
        let loss = pathloss_user(&p, &uav, &user).unwrap();
        let snr_db = p.p_d_dbm - loss - 10.0 * bw.log10() - p.omega_n_db - p.noise_density_dbm_hz;
        let expected = bw * (1.0 + 10f64.powf(snr_db / 10.0)).log2();
        assert_relative_eq!(
            data_rate(&p, &uav, &user, bw).unwrap(),
            expected,
            max_relative = 1e-12
        );
    }

    #[test]
    fn data_rate_rejects_nonpositive_bandwidth() {
        let p = params();
        let uav = Point3::new(0.0, 0.0, 100.0);
        let user = Point3::ground(50.0, 0.0);
        assert!(matches!(data_rate(&p, &uav, &user, 0.0), Err(Error::Domain(_))));
        assert!(matches!(data_rate(&p, &uav, &user, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn backhaul_capacity_term_by_term_oracle() {
        let p = params();
        let uav = Point3::new(0.0, 0.0, 100.0);
        let gbs = Point3::ground(0.0, 0.0);
        let b_g = 10.0e6_f64;
        let loss = p.const_a_db() + 10.0 * p.eta * 100.0f64.log10() + p.const_b_db();
        let snr_db = p.p_g_dbm - loss - 10.0 * b_g.log10() - p.omega_n_db - p.noise_density_dbm_hz;
        let expected = b_g * (1.0 + 10f64.powf(snr_db / 10.0)).log2();
        assert_relative_eq!(
            backhaul_capacity(&p, &uav, &gbs, b_g).unwrap(),
            expected,
            max_relative = 1e-12
        );
    }

    #[test]
    fn backhaul_capacity_increases_with_tx_power() {
        let mut p = params();
        let uav = Point3::new(0.0, 0.0, 100.0);
        let gbs = Point3::ground(300.0, 0.0);
        let c1 = backhaul_capacity(&p, &uav, &gbs, 10.0e6).unwrap();
        p.p_g_dbm += 3.0;
        let c2 = backhaul_capacity(&p, &uav, &gbs, 10.0e6).unwrap();
        assert!(c2 > c1);
    }

    #[test]
    fn backhaul_capacity_decreases_with_distance() {
        let p = params();
        let gbs = Point3::ground(0.0, 0.0);
        let near = Point3::new(100.0, 0.0, 100.0);
        let far = Point3::new(200.0, 0.0, 200.0);
        let c_near = backhaul_capacity(&p, &near, &gbs, 10.0e6).unwrap();
        let c_far = backhaul_capacity(&p, &far, &gbs, 10.0e6).unwrap();
        assert!(c_far < c_near);
    }

    #[test]
    fn best_gbs_single_entry() {
        let p = params();
        let uav = Point3::new(0.0, 0.0, 100.0);
        let gbss = vec![(Point3::ground(10.0, 10.0), 10.0e6)];
        assert_eq!(best_gbs(&p, &uav, &gbss).unwrap().0, 0);
    }

    #[test]
    fn best_gbs_prefers_closer_station() {
        let p = params();
        let uav = Point3::new(0.0, 0.0, 100.0);
        let gbss = vec![
            (Point3::ground(800.0, 0.0), 10.0e6),
            (Point3::ground(100.0, 0.0), 10.0e6),
        ];
        assert_eq!(best_gbs(&p, &uav, &gbss).unwrap().0, 1);
    }

    #[test]
    fn best_gbs_matches_exhaustive_scan() {
        let p = params();
        let uav = Point3::new(321.0, 741.0, 180.0);
        let gbss = vec![
            (Point3::ground(0.0, 0.0), 10.0e6),
            (Point3::ground(1500.0, 0.0), 10.0e6),
            (Point3::ground(0.0, 1500.0), 10.0e6),
            (Point3::ground(1500.0, 1500.0), 10.0e6),
        ];
        let (idx, cap) = best_gbs(&p, &uav, &gbss).unwrap();
        let caps: Vec<f64> = gbss
            .iter()
            .map(|(pos, b)| backhaul_capacity(&p, &uav, pos, *b).unwrap())
            .collect();
        let best_idx = caps
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(idx, best_idx);
        assert_relative_eq!(cap, caps[best_idx]);
    }

    #[test]
    fn best_gbs_empty_errors() {
        let p = params();
        let uav = Point3::new(0.0, 0.0, 100.0);
        assert!(matches!(best_gbs(&p, &uav, &[]), Err(Error::Domain(_))));
    }
}
