//! One-dimensional k-means over depth samples.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{BoundingBox, GeometryError, PixelPoint, Result};

const MAX_ITERATIONS: usize = 100;
const CENTER_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthCluster {
    pub center: f64,
    pub size: usize,
}

/// Lloyd's algorithm on scalar depths with k-means++ seeding.
///
/// Centers come back sorted ascending, so the nearest cluster is always
/// `result[0]`. A sample equidistant from two centers goes to the smaller one.
pub fn cluster_depths<R: Rng + ?Sized>(
    depths: &[f64],
    k: usize,
    rng: &mut R,
) -> Result<Vec<DepthCluster>> {
    if depths.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    if k == 0 || k > depths.len() {
        return Err(GeometryError::InvalidClusterCount {
            k,
            n: depths.len(),
        });
    }

    let mut centers = seed_centers(depths, k, rng);
    centers.sort_by(f64::total_cmp);
    let mut labels = vec![usize::MAX; depths.len()];
    let mut sizes = vec![0usize; k];

    for _ in 0..MAX_ITERATIONS {
        let changed = assign(depths, &centers, &mut labels);
        if !changed {
            break;
        }
        let shift = update(depths, &labels, &mut centers, &mut sizes);
        if shift < CENTER_TOLERANCE {
            // Re-check the partition so the returned centers are a fixed point.
            if !assign(depths, &centers, &mut labels) {
                break;
            }
            update(depths, &labels, &mut centers, &mut sizes);
        }
    }

    sizes.iter_mut().for_each(|s| *s = 0);
    for &l in &labels {
        sizes[l] += 1;
    }
    let mut out: Vec<DepthCluster> = centers
        .iter()
        .zip(&sizes)
        .map(|(&center, &size)| DepthCluster { center, size })
        .collect();
    out.sort_by(|a, b| a.center.total_cmp(&b.center));
    Ok(out)
}

fn seed_centers<R: Rng + ?Sized>(depths: &[f64], k: usize, rng: &mut R) -> Vec<f64> {
    let n = depths.len();
    let mut centers = Vec::with_capacity(k);
    centers.push(depths[rng.random_range(0..n)]);
    let mut dist2: Vec<f64> = depths
        .iter()
        .map(|&d| (d - centers[0]) * (d - centers[0]))
        .collect();
    while centers.len() < k {
        let total: f64 = dist2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, &w) in dist2.iter().enumerate() {
                if target < w {
                    idx = i;
                    break;
                }
                target -= w;
            }
            idx
        } else {
            // Every sample coincides with a center already.
            0
        };
        let c = depths[pick];
        centers.push(c);
        for (d2, &d) in dist2.iter_mut().zip(depths) {
            *d2 = d2.min((d - c) * (d - c));
        }
    }
    centers
}

fn nearest(d: f64, centers: &[f64]) -> usize {
    let mut best = 0;
    let mut best_dist = (d - centers[0]).abs();
    for (j, &c) in centers.iter().enumerate().skip(1) {
        let dist = (d - c).abs();
        if dist < best_dist {
            best = j;
            best_dist = dist;
        }
    }
    best
}

fn assign(depths: &[f64], centers: &[f64], labels: &mut [usize]) -> bool {
    let mut changed = false;
    for (l, &d) in labels.iter_mut().zip(depths) {
        let j = nearest(d, centers);
        if *l != j {
            *l = j;
            changed = true;
        }
    }
    changed
}

/// Recomputes centers as cluster means, keeping empty clusters in place.
/// Returns the largest center movement.
fn update(depths: &[f64], labels: &[usize], centers: &mut [f64], sizes: &mut [usize]) -> f64 {
    let mut sums = vec![0.0; centers.len()];
    sizes.iter_mut().for_each(|s| *s = 0);
    for (&l, &d) in labels.iter().zip(depths) {
        sums[l] += d;
        sizes[l] += 1;
    }
    let mut shift: f64 = 0.0;
    for ((c, s), &n) in centers.iter_mut().zip(&sums).zip(sizes.iter()) {
        if n > 0 {
            let next = s / n as f64;
            shift = shift.max((next - *c).abs());
            *c = next;
        }
    }
    shift
}

/// Per-pixel depths over a rectangular image region, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthPatch {
    pub region: BoundingBox,
    pub cols: usize,
    pub rows: usize,
    pub depths: Vec<f64>,
}

impl DepthPatch {
    pub fn new(region: BoundingBox, cols: usize, rows: usize, depths: Vec<f64>) -> Self {
        assert_eq!(depths.len(), cols * rows, "patch size mismatch");
        Self {
            region,
            cols,
            rows,
            depths,
        }
    }

    pub fn uniform(region: BoundingBox, cols: usize, rows: usize, depth: f64) -> Self {
        Self::new(region, cols, rows, vec![depth; cols * rows])
    }

    pub fn pixel_center(&self, col: usize, row: usize) -> PixelPoint {
        PixelPoint::new(
            self.region.u_min + (col as f64 + 0.5) * self.region.width() / self.cols as f64,
            self.region.v_min + (row as f64 + 0.5) * self.region.height() / self.rows as f64,
        )
    }

    /// Depths of the pixels whose centers fall inside `bbox`.
    pub fn samples_in(&self, bbox: &BoundingBox) -> Vec<f64> {
        let mut out = Vec::new();
        for row in 0..self.rows {
            for col in 0..self.cols {
                if bbox.contains(self.pixel_center(col, row)) {
                    out.push(self.depths[row * self.cols + col]);
                }
            }
        }
        out
    }
}

/// Distance to the pedestrian: center of the nearest depth cluster inside the box.
pub fn pedestrian_distance_from_bbox<R: Rng + ?Sized>(
    bbox: &BoundingBox,
    patch: &DepthPatch,
    k: usize,
    rng: &mut R,
) -> Result<f64> {
    if !patch.region.contains_box(bbox) {
        return Err(GeometryError::PatchDoesNotCoverBox);
    }
    let samples = patch.samples_in(bbox);
    let k = k.min(samples.len()).max(1);
    let clusters = cluster_depths(&samples, k, rng)?;
    Ok(clusters[0].center)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    /// Best contiguous 2-split of sorted data by total squared error.
    fn best_two_split(data: &[f64]) -> (f64, f64) {
        let mut v = data.to_vec();
        v.sort_by(f64::total_cmp);
        let sse = |s: &[f64]| {
            let m = s.iter().sum::<f64>() / s.len() as f64;
            (m, s.iter().map(|x| (x - m) * (x - m)).sum::<f64>())
        };
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for cut in 1..v.len() {
            let (m1, e1) = sse(&v[..cut]);
            let (m2, e2) = sse(&v[cut..]);
            if e1 + e2 < best.0 {
                best = (e1 + e2, m1, m2);
            }
        }
        (best.1, best.2)
    }

    #[test]
    fn separated_clusters_match_enumeration() {
        let mut depths = vec![2.0; 10];
        depths.extend(vec![10.0; 5]);
        let (lo, hi) = best_two_split(&depths);
        assert_eq!((lo, hi), (2.0, 10.0));
        let c = cluster_depths(&depths, 2, &mut rng()).unwrap();
        assert_eq!(c[0], DepthCluster { center: 2.0, size: 10 });
        assert_eq!(c[1], DepthCluster { center: 10.0, size: 5 });
    }

    #[test]
    fn degenerate_inputs() {
        let depths = vec![4.25; 7];
        for k in 1..=7 {
            let c = cluster_depths(&depths, k, &mut rng()).unwrap();
            assert!(c.iter().all(|c| c.center == 4.25));
            assert_eq!(c.iter().map(|c| c.size).sum::<usize>(), 7);
        }
        let depths = [1.0, 2.0, 6.0, 7.5];
        let c = cluster_depths(&depths, 1, &mut rng()).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0].center - 4.125).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert_eq!(
            cluster_depths(&[], 2, &mut rng()),
            Err(GeometryError::EmptyInput)
        );
        assert!(matches!(
            cluster_depths(&[1.0], 2, &mut rng()),
            Err(GeometryError::InvalidClusterCount { k: 2, n: 1 })
        ));
        assert!(cluster_depths(&[1.0], 0, &mut rng()).is_err());
    }

    #[test]
    fn ties_go_to_the_smaller_center() {
        assert_eq!(nearest(5.0, &[4.0, 6.0]), 0);
        assert_eq!(nearest(5.0, &[3.0, 4.0, 6.0]), 1);
    }

    #[test]
    fn pedestrian_in_front_of_background() {
        let region = BoundingBox::new(100.0, 50.0, 110.0, 70.0);
        let mut depths = vec![5.0; 200];
        for d in depths.iter_mut().step_by(3) {
            *d = 30.0;
        }
        let patch = DepthPatch::new(region, 10, 20, depths);
        let d = pedestrian_distance_from_bbox(&region, &patch, 2, &mut rng()).unwrap();
        assert_eq!(d, 5.0);

        let uniform = DepthPatch::uniform(region, 10, 20, 12.5);
        assert_eq!(
            pedestrian_distance_from_bbox(&region, &uniform, 2, &mut rng()).unwrap(),
            12.5
        );

        let single = DepthPatch::uniform(BoundingBox::new(0.0, 0.0, 1.0, 1.0), 1, 1, 3.0);
        assert_eq!(
            pedestrian_distance_from_bbox(&single.region, &single, 1, &mut rng()).unwrap(),
            3.0
        );

        let outside = BoundingBox::new(90.0, 50.0, 110.0, 70.0);
        assert_eq!(
            pedestrian_distance_from_bbox(&outside, &patch, 2, &mut rng()),
            Err(GeometryError::PatchDoesNotCoverBox)
        );
    }

    proptest! {
        #[test]
        fn centers_are_a_partition_fixed_point(
            depths in prop::collection::vec(0.5f64..80.0, 1..120),
            k in 1usize..5,
            seed in any::<u64>(),
        ) {
            let k = k.min(depths.len());
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let clusters = cluster_depths(&depths, k, &mut r).unwrap();
            prop_assert_eq!(clusters.len(), k);
            prop_assert!(clusters.windows(2).all(|w| w[0].center <= w[1].center));
            let centers: Vec<f64> = clusters.iter().map(|c| c.center).collect();
            let mut counts = vec![0usize; k];
            let mut sums = vec![0.0; k];
            for &d in &depths {
                let j = nearest(d, &centers);
                counts[j] += 1;
                sums[j] += d;
            }
            for j in 0..k {
                prop_assert_eq!(counts[j], clusters[j].size);
                if counts[j] > 0 {
                    let mean = sums[j] / counts[j] as f64;
                    prop_assert!((mean - centers[j]).abs() <= 1e-9 * mean.abs().max(1.0));
                }
            }
        }

        #[test]
        fn two_clusters_agree_with_exhaustive_split_when_well_separated(
            near in prop::collection::vec(1.0f64..3.0, 2..40),
            far in prop::collection::vec(20.0f64..25.0, 1..40),
            seed in any::<u64>(),
        ) {
            let mut all = near.clone();
            all.extend(&far);
            let (lo, hi) = best_two_split(&all);
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let c = cluster_depths(&all, 2, &mut r).unwrap();
            prop_assert!((c[0].center - lo).abs() < 1e-9);
            prop_assert!((c[1].center - hi).abs() < 1e-9);
        }
    }
}
