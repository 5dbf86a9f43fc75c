//! Frozen feature name registries. Column meaning is stable across runs;
//! tests assert the exact order and count per mode.

use super::FeatureMode;

/// 48 time-domain features: 11 HRV, 18 P wave, 5 PRI, 14 QRS.
pub const FEATURE_NAMES_TIME48: [&str; 48] = [
    // HRV block
    "HR_max",
    "HR_min",
    "HR_mean",
    "HR_std",
    "HR_MaxDev",
    "HR_MAD",
    "HR_kurt",
    "HR_skew",
    "HR_ApEn",
    "HR_ShEn",
    "HR_PeEn",
    // P wave block (per-beat statistic, mean then std)
    "P_peak_mean",
    "P_peak_std",
    "P_width_mean",
    "P_width_std",
    "P_MaxDev_mean",
    "P_MaxDev_std",
    "P_energy_mean",
    "P_energy_std",
    "P_Corr_mean",
    "P_Corr_std",
    "P_SpEn_mean",
    "P_SpEn_std",
    "P_kurt_mean",
    "P_kurt_std",
    "P_skew_mean",
    "P_skew_std",
    "P_atrialHR_mean",
    "P_atrialHR_std",
    // PRI block
    "PRI_mean",
    "PRI_std",
    "PRI_max",
    "PRI_min",
    "PRI_MaxDev",
    // QRS block
    "QRS_width_mean",
    "QRS_width_std",
    "QRS_Corr_mean",
    "QRS_Corr_std",
    "QRS_energy_mean",
    "QRS_energy_std",
    "QRS_SpEn_mean",
    "QRS_SpEn_std",
    "QRS_SaEn_mean",
    "QRS_SaEn_std",
    "QRS_kurt_mean",
    "QRS_kurt_std",
    "QRS_skew_mean",
    "QRS_skew_std",
];

/// 66 features: the 11 HRV above plus 5 extended HRV, then 10 features for
/// each detail level D3..D7.
pub const FEATURE_NAMES_WAVELET66: [&str; 66] = [
    "HR_max",
    "HR_min",
    "HR_mean",
    "HR_std",
    "HR_MaxDev",
    "HR_MAD",
    "HR_kurt",
    "HR_skew",
    "HR_ApEn",
    "HR_ShEn",
    "HR_PeEn",
    "HR_StdAbsDiff",
    "HR_CoV",
    "HR_HFD",
    "HR_HM",
    "HR_HC",
    "D3_mean",
    "D3_std",
    "D3_skew",
    "D3_kurt",
    "D3_ApEn",
    "D3_ShEn",
    "D3_PeEn",
    "D3_LogEnEn",
    "D3_RWE",
    "D3_MWE",
    "D4_mean",
    "D4_std",
    "D4_skew",
    "D4_kurt",
    "D4_ApEn",
    "D4_ShEn",
    "D4_PeEn",
    "D4_LogEnEn",
    "D4_RWE",
    "D4_MWE",
    "D5_mean",
    "D5_std",
    "D5_skew",
    "D5_kurt",
    "D5_ApEn",
    "D5_ShEn",
    "D5_PeEn",
    "D5_LogEnEn",
    "D5_RWE",
    "D5_MWE",
    "D6_mean",
    "D6_std",
    "D6_skew",
    "D6_kurt",
    "D6_ApEn",
    "D6_ShEn",
    "D6_PeEn",
    "D6_LogEnEn",
    "D6_RWE",
    "D6_MWE",
    "D7_mean",
    "D7_std",
    "D7_skew",
    "D7_kurt",
    "D7_ApEn",
    "D7_ShEn",
    "D7_PeEn",
    "D7_LogEnEn",
    "D7_RWE",
    "D7_MWE",
];

/// The canonical column names for a feature mode.
pub fn feature_names(mode: FeatureMode) -> &'static [&'static str] {
    match mode {
        FeatureMode::Time48 => &FEATURE_NAMES_TIME48,
        FeatureMode::Wavelet66 => &FEATURE_NAMES_WAVELET66,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_modes() {
        assert_eq!(feature_names(FeatureMode::Time48).len(), 48);
        assert_eq!(feature_names(FeatureMode::Wavelet66).len(), 66);
    }

    #[test]
    fn time48_block_sizes() {
        let names = &FEATURE_NAMES_TIME48;
        assert_eq!(names.iter().filter(|n| n.starts_with("HR_")).count(), 11);
        assert_eq!(names.iter().filter(|n| n.starts_with("P_")).count(), 18);
        assert_eq!(names.iter().filter(|n| n.starts_with("PRI_")).count(), 5);
        assert_eq!(names.iter().filter(|n| n.starts_with("QRS_")).count(), 14);
    }

    #[test]
    fn wavelet66_block_sizes() {
        let names = &FEATURE_NAMES_WAVELET66;
        assert_eq!(names.iter().filter(|n| n.starts_with("HR_")).count(), 16);
        for level in ["D3", "D4", "D5", "D6", "D7"] {
            assert_eq!(
                names
                    .iter()
                    .filter(|n| n.starts_with(&format!("{level}_")))
                    .count(),
                10
            );
        }
    }

    #[test]
    fn frozen_order_spot_checks() {
        assert_eq!(FEATURE_NAMES_TIME48[0], "HR_max");
        assert_eq!(FEATURE_NAMES_TIME48[11], "P_peak_mean");
        assert_eq!(FEATURE_NAMES_TIME48[29], "PRI_mean");
        assert_eq!(FEATURE_NAMES_TIME48[34], "QRS_width_mean");
        assert_eq!(FEATURE_NAMES_TIME48[47], "QRS_skew_std");
        assert_eq!(FEATURE_NAMES_WAVELET66[15], "HR_HC");
        assert_eq!(FEATURE_NAMES_WAVELET66[16], "D3_mean");
        assert_eq!(FEATURE_NAMES_WAVELET66[65], "D7_MWE");
        // all names unique
        let mut set = std::collections::HashSet::new();
        assert!(FEATURE_NAMES_WAVELET66.iter().all(|n| set.insert(n)));
        set.clear();
        assert!(FEATURE_NAMES_TIME48.iter().all(|n| set.insert(n)));
    }
}
