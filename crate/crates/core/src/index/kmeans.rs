//! Choosing representative topic vectors by spherical k-means.

use rand::{Rng, RngCore};

use crate::error::Result;
use crate::graph::{dot, TopicVector};

const MAX_ITERATIONS: usize = 100;
const MOVEMENT_TOLERANCE: f64 = 1e-6;

fn unit(v: &[f64]) -> Vec<f64> {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter().map(|x| x / norm).collect()
    } else {
        v.to_vec()
    }
}

fn to_simplex(v: &[f64]) -> Result<TopicVector> {
    let sum: f64 = v.iter().sum();
    let mut out: Vec<f64> = v.iter().map(|x| x / sum).collect();
    // push the rounding residue into the largest entry
    let residue = 1.0 - out.iter().sum::<f64>();
    if let Some(i) = (0..out.len()).max_by(|&a, &b| out[a].total_cmp(&out[b])) {
        out[i] += residue;
    }
    TopicVector::query(out)
}

fn nearest(x: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_sim = f64::NEG_INFINITY;
    for (c, center) in centers.iter().enumerate() {
        let s = dot(x, center);
        if s > best_sim {
            best_sim = s;
            best = c;
        }
    }
    best
}

/// Picks `h` cluster centers from `samples`.
///
/// Seeding is k-means++ over unit-normalized samples (squared chord
/// distance), followed by Lloyd iterations that assign by cosine and
/// renormalize member sums. Centers are returned scaled to sum 1. With at
/// most `h` distinct samples, those samples are returned as they are.
pub fn select_topic_vectors<R: RngCore>(
    samples: &[TopicVector],
    h: usize,
    rng: &mut R,
) -> Result<Vec<TopicVector>> {
    let mut distinct: Vec<&TopicVector> = Vec::new();
    {
        let mut seen = std::collections::HashSet::new();
        for s in samples {
            let bits: Vec<u64> = s.as_slice().iter().map(|x| x.to_bits()).collect();
            if seen.insert(bits) {
                distinct.push(s);
            }
        }
    }
    if distinct.len() <= h {
        return Ok(distinct.into_iter().cloned().collect());
    }

    let points: Vec<Vec<f64>> = distinct.iter().map(|s| unit(s.as_slice())).collect();
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(h);
    centers.push(points[rng.random_range(0..points.len())].clone());
    let chord = |a: &[f64], b: &[f64]| (2.0 - 2.0 * dot(a, b)).max(0.0);
    let mut d2: Vec<f64> = points.iter().map(|p| chord(p, &centers[0])).collect();
    while centers.len() < h {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = d2.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..points.len())
        };
        let c = points[pick].clone();
        for (d, p) in d2.iter_mut().zip(&points) {
            *d = d.min(chord(p, &c));
        }
        centers.push(c);
    }

    let dim = points[0].len();
    let mut assign = vec![0usize; points.len()];
    for _ in 0..MAX_ITERATIONS {
        for (a, p) in assign.iter_mut().zip(&points) {
            *a = nearest(p, &centers);
        }
        let mut sums = vec![vec![0.0; dim]; h];
        let mut counts = vec![0usize; h];
        for (&a, p) in assign.iter().zip(&points) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(p) {
                *s += x;
            }
        }
        let mut movement = 0.0f64;
        for c in 0..h {
            if counts[c] == 0 {
                continue;
            }
            let next = unit(&sums[c]);
            let shift: f64 = next
                .iter()
                .zip(&centers[c])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            movement = movement.max(shift);
            centers[c] = next;
        }
        if movement < MOVEMENT_TOLERANCE {
            break;
        }
    }
    centers.iter().map(|c| to_simplex(c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tv(v: &[f64]) -> TopicVector {
        TopicVector::query(v.to_vec()).unwrap()
    }

    #[test]
    fn identical_samples_collapse() {
        let samples = vec![tv(&[0.3, 0.7]); 10];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let gamma = select_topic_vectors(&samples, 4, &mut rng).unwrap();
        assert_eq!(gamma, vec![tv(&[0.3, 0.7])]);
    }

    #[test]
    fn one_center_per_sample() {
        let samples = vec![tv(&[1.0, 0.0]), tv(&[0.5, 0.5]), tv(&[0.0, 1.0])];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(select_topic_vectors(&samples, 3, &mut rng).unwrap(), samples);
    }

    #[test]
    fn separated_clusters() {
        let mut samples = Vec::new();
        for i in 0..20 {
            let d = 0.001 * (i as f64 - 10.0);
            samples.push(tv(&[0.9 + d, 0.1 - d]));
            samples.push(tv(&[0.2 + d, 0.8 - d]));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut gamma = select_topic_vectors(&samples, 2, &mut rng).unwrap();
        gamma.sort_by(|a, b| a.as_slice()[0].total_cmp(&b.as_slice()[0]));
        assert!(gamma[0].as_slice()[0] > 0.15 && gamma[0].as_slice()[0] < 0.25);
        assert!(gamma[1].as_slice()[0] > 0.85 && gamma[1].as_slice()[0] < 0.95);
        for g in &gamma {
            assert!((g.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
