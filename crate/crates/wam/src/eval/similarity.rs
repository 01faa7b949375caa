use crate::registry::Registry;

/// Similarity used to rank target words; larger means closer.
pub trait Similarity {
    fn name(&self) -> &str;
    fn score(&self, a: &[f64], b: &[f64]) -> f64;
}

/// Cosine of the angle; 0 when either vector is zero.
pub struct Cosine;

impl Similarity for Cosine {
    fn name(&self) -> &str {
        "cosine"
    }

    fn score(&self, a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            dot / (na * nb)
        }
    }
}

/// Negated Euclidean distance.
pub struct Euclidean;

impl Similarity for Euclidean {
    fn name(&self) -> &str {
        "euclidean"
    }

    fn score(&self, a: &[f64], b: &[f64]) -> f64 {
        -a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }
}

pub type SimilarityFactory = fn() -> Box<dyn Similarity>;

pub fn similarities() -> Registry<SimilarityFactory> {
    let mut r: Registry<SimilarityFactory> = Registry::new("similarity metric");
    r.register("cosine", || Box::new(Cosine))
        .register("euclidean", || Box::new(Euclidean));
    r
}
