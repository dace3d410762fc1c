//! Scenario parameters.
//!
//! A [`NetworkConfig`] is read from a flat TOML file whose keys are the field
//! names below (SI units, powers in watts). Missing keys take the paper-scale
//! defaults of [`NetworkConfig::paper`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The three kinds of transmitting user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UserClass {
    Hue,
    Lue,
    Due,
}

impl UserClass {
    pub const ALL: [UserClass; 3] = [UserClass::Hue, UserClass::Lue, UserClass::Due];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    /// HUEs served by the high power node (H).
    pub hues: usize,
    /// Low power nodes on the ring (L).
    pub lpns: usize,
    /// LUEs per LPN (M).
    pub lues_per_lpn: usize,
    /// D2D pairs per LPN (K).
    pub dues_per_lpn: usize,
    /// Subcarriers shared by every cell (N).
    pub subcarriers: usize,

    pub bandwidth_per_subcarrier_hz: f64,
    /// Thermal noise power spectral density, W/Hz.
    pub noise_psd_w_per_hz: f64,

    pub p_max_hue_w: f64,
    pub p_max_lue_w: f64,
    pub p_max_due_w: f64,

    /// Per-user secrecy QoS thresholds, bits/s/Hz.
    pub c_min_hue: f64,
    pub c_min_lue: f64,
    pub c_min_due: f64,

    /// Interference budget for HUE leakage into the LPNs (subcarrier heuristic).
    pub i_max_hue_w: f64,
    /// Interference budget for LUE and DUE leakage into the HPN.
    pub i_max_lpn_w: f64,

    pub hpn_radius_m: f64,
    pub lpn_radius_m: f64,
    pub lpn_ring_m: f64,
    pub d2d_distance_m: f64,
    pub min_dist_hpn_m: f64,
    pub min_dist_lpn_m: f64,

    /// (intercept dB, slope dB/decade) for short intra-cell links.
    pub pathloss_short: [f64; 2],
    /// (intercept dB, slope dB/decade) for every other link.
    pub pathloss_long: [f64; 2],

    pub seed: u64,

    /// Transmit power of the fixed-power baseline as a fraction of each class's p_max.
    pub fixed_power_fraction: f64,
    /// Interference-avoidance baseline: a user moves when its inflicted
    /// interference exceeds this multiple of the cell median.
    pub ia_threshold_factor: f64,
    pub ia_passes: usize,
    /// Largest number of per-subcarrier power solves the exhaustive search may issue.
    pub exhaustive_cap: usize,
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w * 1000.0).log10()
}

const HPN_TOTAL_DBM: f64 = 43.0;
const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

impl Default for NetworkConfig {
    fn default() -> Self {
        Self::paper()
    }
}

impl NetworkConfig {
    /// The full-size simulation scenario: 2 HUEs, 5 LUEs and 5 D2D pairs per
    /// LPN, 8 subcarriers of 200 kHz.
    pub fn paper() -> Self {
        let subcarriers = 8;
        Self {
            hues: 2,
            lpns: 3,
            lues_per_lpn: 5,
            dues_per_lpn: 5,
            subcarriers,
            bandwidth_per_subcarrier_hz: 200e3,
            noise_psd_w_per_hz: dbm_to_watts(THERMAL_NOISE_DBM_PER_HZ),
            p_max_hue_w: dbm_to_watts(HPN_TOTAL_DBM) / subcarriers as f64,
            p_max_lue_w: dbm_to_watts(24.0),
            p_max_due_w: dbm_to_watts(15.0),
            c_min_hue: 0.0,
            c_min_lue: 0.0,
            c_min_due: 0.0,
            i_max_hue_w: 1e-12,
            i_max_lpn_w: 1e-12,
            hpn_radius_m: 800.0,
            lpn_radius_m: 200.0,
            lpn_ring_m: 1000.0,
            d2d_distance_m: 10.0,
            min_dist_hpn_m: 50.0,
            min_dist_lpn_m: 20.0,
            pathloss_short: [31.5, 40.0],
            pathloss_long: [31.5, 35.0],
            seed: 1,
            fixed_power_fraction: 0.5,
            ia_threshold_factor: 1.0,
            ia_passes: 1,
            exhaustive_cap: 4096,
        }
    }

    /// Small instance used for quick experiments and CI: H=2, L=2, M=2, K=2, N=4.
    pub fn desk() -> Self {
        Self::paper().resized(2, 2, 2, 2, 4)
    }

    /// Instance small enough for the exhaustive upper bound: H=2, L=2, M=2, K=1, N=2.
    pub fn tiny() -> Self {
        Self::paper().resized(2, 2, 2, 1, 2)
    }

    /// Changes the population sizes. The HUE power budget follows the HPN
    /// total split equally over the subcarriers.
    pub fn resized(mut self, hues: usize, lpns: usize, lues: usize, dues: usize, subcarriers: usize) -> Self {
        self.hues = hues;
        self.lpns = lpns;
        self.lues_per_lpn = lues;
        self.dues_per_lpn = dues;
        self.subcarriers = subcarriers;
        self.p_max_hue_w = dbm_to_watts(HPN_TOTAL_DBM) / subcarriers.max(1) as f64;
        self
    }

    /// Sets the same QoS threshold (bits/s/Hz) for every class.
    pub fn with_qos(mut self, c_min: f64) -> Self {
        self.c_min_hue = c_min;
        self.c_min_lue = c_min;
        self.c_min_due = c_min;
        self
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        for (name, v) in [
            ("hues", self.hues),
            ("lpns", self.lpns),
            ("lues_per_lpn", self.lues_per_lpn),
            ("dues_per_lpn", self.dues_per_lpn),
            ("subcarriers", self.subcarriers),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        for (name, v) in [
            ("bandwidth_per_subcarrier_hz", self.bandwidth_per_subcarrier_hz),
            ("noise_psd_w_per_hz", self.noise_psd_w_per_hz),
            ("p_max_hue_w", self.p_max_hue_w),
            ("p_max_lue_w", self.p_max_lue_w),
            ("p_max_due_w", self.p_max_due_w),
            ("i_max_hue_w", self.i_max_hue_w),
            ("i_max_lpn_w", self.i_max_lpn_w),
            ("hpn_radius_m", self.hpn_radius_m),
            ("lpn_radius_m", self.lpn_radius_m),
            ("lpn_ring_m", self.lpn_ring_m),
            ("d2d_distance_m", self.d2d_distance_m),
            ("min_dist_hpn_m", self.min_dist_hpn_m),
            ("min_dist_lpn_m", self.min_dist_lpn_m),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        for (name, v) in [
            ("c_min_hue", self.c_min_hue),
            ("c_min_lue", self.c_min_lue),
            ("c_min_due", self.c_min_due),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        if self.min_dist_hpn_m >= self.hpn_radius_m {
            return bad("min_dist_hpn_m must be below hpn_radius_m".into());
        }
        if self.min_dist_lpn_m >= self.lpn_radius_m {
            return bad("min_dist_lpn_m must be below lpn_radius_m".into());
        }
        if self.d2d_distance_m >= 2.0 * self.lpn_radius_m {
            return bad("d2d_distance_m must fit inside an LPN cell".into());
        }
        for (name, pl) in [("pathloss_short", self.pathloss_short), ("pathloss_long", self.pathloss_long)] {
            if !pl.iter().all(|v| v.is_finite()) || pl[1] < 0.0 {
                return bad(format!("{name} must be finite with a non-negative slope"));
            }
        }
        if !(0.0..=1.0).contains(&self.fixed_power_fraction) {
            return bad("fixed_power_fraction must lie in [0, 1]".into());
        }
        if !(self.ia_threshold_factor.is_finite() && self.ia_threshold_factor > 0.0) {
            return bad("ia_threshold_factor must be positive".into());
        }
        Ok(())
    }

    /// Receiver noise power per subcarrier (bandwidth times noise PSD), W.
    pub fn noise_w(&self) -> f64 {
        self.bandwidth_per_subcarrier_hz * self.noise_psd_w_per_hz
    }

    pub fn p_max(&self, class: UserClass) -> f64 {
        match class {
            UserClass::Hue => self.p_max_hue_w,
            UserClass::Lue => self.p_max_lue_w,
            UserClass::Due => self.p_max_due_w,
        }
    }

    /// QoS threshold in bits/s/Hz.
    pub fn c_min(&self, class: UserClass) -> f64 {
        match class {
            UserClass::Hue => self.c_min_hue,
            UserClass::Lue => self.c_min_lue,
            UserClass::Due => self.c_min_due,
        }
    }

    /// QoS threshold in nats/s/Hz, the unit used inside the power solver.
    pub fn c_min_nats(&self, class: UserClass) -> f64 {
        self.c_min(class) * std::f64::consts::LN_2
    }

    pub fn user_count(&self, class: UserClass) -> usize {
        match class {
            UserClass::Hue => self.hues,
            UserClass::Lue => self.lpns * self.lues_per_lpn,
            UserClass::Due => self.lpns * self.dues_per_lpn,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        NetworkConfig::paper().validate().unwrap();
        NetworkConfig::desk().validate().unwrap();
        NetworkConfig::tiny().validate().unwrap();
    }

    #[test]
    fn hue_budget_is_hpn_total_split_over_subcarriers() {
        let cfg = NetworkConfig::paper();
        let total = cfg.p_max_hue_w * cfg.subcarriers as f64;
        assert!((watts_to_dbm(total) - 43.0).abs() < 1e-9);
        assert!((watts_to_dbm(cfg.p_max_due_w) - 15.0).abs() < 1e-9);
    }

    #[test]
    fn flat_file_overrides_defaults() {
        let cfg = NetworkConfig::from_toml_str("lpns = 4\nseed = 99\npathloss_long = [30.0, 36.0]\n").unwrap();
        assert_eq!(cfg.lpns, 4);
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.pathloss_long, [30.0, 36.0]);
        assert_eq!(cfg.hues, NetworkConfig::paper().hues);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(NetworkConfig::from_toml_str("bogus = 1").is_err());
        assert!(NetworkConfig::from_toml_str("subcarriers = 0").is_err());
        assert!(NetworkConfig::from_toml_str("min_dist_lpn_m = 300.0").is_err());
        assert!(NetworkConfig::from_toml_str("p_max_lue_w = -1.0").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = NetworkConfig::desk().with_qos(0.1);
        let back = NetworkConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, back);
    }
}
