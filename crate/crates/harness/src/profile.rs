//! Elevation profiles of hill-climbing runs.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProfileError {
    #[error("episode group {0} is empty")]
    EmptyGroup(usize),
}

/// Splits `episodes` (in order) into `groups` contiguous ranges of near-equal
/// size and averages the relative elevation at each step index within each
/// range. A step index is averaged over the episodes long enough to reach it.
pub fn elevation_profile(
    episodes: &[Vec<i32>],
    groups: usize,
) -> Result<Vec<Vec<f64>>, ProfileError> {
    let n = episodes.len();
    (0..groups)
        .map(|g| {
            let (lo, hi) = (g * n / groups, (g + 1) * n / groups);
            let group = &episodes[lo..hi];
            let len = group
                .iter()
                .map(Vec::len)
                .max()
                .ok_or(ProfileError::EmptyGroup(g))?;
            Ok((0..len)
                .map(|step| {
                    let values: Vec<f64> = group
                        .iter()
                        .filter_map(|e| e.get(step).map(|&v| f64::from(v)))
                        .collect();
                    values.iter().sum::<f64>() / values.len() as f64
                })
                .collect())
        })
        .collect()
}

/// Mean final relative elevation over each of the `groups` episode ranges.
pub fn final_elevations(episodes: &[Vec<i32>], groups: usize) -> Result<Vec<f64>, ProfileError> {
    Ok(elevation_profile(episodes, groups)?
        .into_iter()
        .map(|p| p.last().copied().unwrap_or(0.0))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_agent_is_flat() {
        let eps = vec![vec![0; 81]; 100];
        for p in elevation_profile(&eps, 4).unwrap() {
            assert!(p.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn quartiles_split_in_order() {
        let eps: Vec<Vec<i32>> = (0..8).map(|i| vec![0, i]).collect();
        let finals = final_elevations(&eps, 4).unwrap();
        assert_eq!(finals, vec![0.5, 2.5, 4.5, 6.5]);
    }

    #[test]
    fn too_few_episodes() {
        assert_eq!(
            elevation_profile(&[vec![0]], 4),
            Err(ProfileError::EmptyGroup(0))
        );
    }
}
