//! Lloyd's k-means on 2-d points with k-means++ seeding.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Point = [f64; 2];

#[inline]
pub fn dist2(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

#[inline]
pub fn dist(a: &Point, b: &Point) -> f64 {
    dist2(a, b).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub centroids: Vec<Point>,
    pub labels: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
}

pub fn nearest(centroids: &[Point], p: &Point) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = dist2(c, p);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

fn seed_plus_plus(points: &[Point], k: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..points.len())]);
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, &d) in d2.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..points.len())
        };
        let c = points[next];
        centroids.push(c);
        for (di, p) in d2.iter_mut().zip(points) {
            *di = di.min(dist2(p, &c));
        }
    }
    centroids
}

/// One k-means run. Empty clusters are re-seeded at the point farthest from
/// its centroid.
pub fn kmeans_once(
    points: &[Point],
    k: usize,
    max_iter: usize,
    tol: f64,
    rng: &mut ChaCha8Rng,
) -> Clustering {
    let mut centroids = seed_plus_plus(points, k, rng);
    let mut labels = vec![0; points.len()];
    let mut iterations = 0;
    for it in 1..=max_iter {
        iterations = it;
        for (l, p) in labels.iter_mut().zip(points) {
            *l = nearest(&centroids, p);
        }
        let mut sums = vec![[0.0, 0.0]; k];
        let mut counts = vec![0usize; k];
        for (l, p) in labels.iter().zip(points) {
            sums[*l][0] += p[0];
            sums[*l][1] += p[1];
            counts[*l] += 1;
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            let next = if counts[c] == 0 {
                let (far, _) = points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (i, dist2(p, &centroids[labels[i]])))
                    .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
                labels[far] = c;
                points[far]
            } else {
                [sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64]
            };
            shift = shift.max(dist(&next, &centroids[c]));
            centroids[c] = next;
        }
        if shift < tol {
            break;
        }
    }
    for (l, p) in labels.iter_mut().zip(points) {
        *l = nearest(&centroids, p);
    }
    let inertia = labels.iter().zip(points).map(|(l, p)| dist2(p, &centroids[*l])).sum();
    Clustering { centroids, labels, inertia, iterations }
}

/// Best (lowest inertia) of `restarts` runs.
pub fn kmeans(
    points: &[Point],
    k: usize,
    restarts: usize,
    max_iter: usize,
    tol: f64,
    rng: &mut ChaCha8Rng,
) -> Clustering {
    let mut best: Option<Clustering> = None;
    for _ in 0..restarts.max(1) {
        let run = kmeans_once(points, k, max_iter, tol, rng);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    best.expect("at least one restart")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn two_groups() {
        let pts: Vec<Point> = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [50.0, 50.0], [51.0, 50.0], [50.0, 51.0]];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = kmeans(&pts, 2, 5, 300, 1e-6, &mut rng);
        assert_eq!(c.labels[0], c.labels[1]);
        assert_eq!(c.labels[3], c.labels[5]);
        assert_ne!(c.labels[0], c.labels[3]);
        // each triangle contributes 2/9 + 5/9 + 5/9
        assert!((c.inertia - 8.0 / 3.0).abs() < 1e-9);
    }
}
