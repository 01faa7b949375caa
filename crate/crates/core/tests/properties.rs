use proptest::prelude::*;
use wam_core::{backward, AdamConfig, AdamState, Tensor};

fn row() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-30.0f64..30.0, 1..12)
}

proptest! {
    #[test]
    fn softmax_rows_sum_to_one(values in row()) {
        let n = values.len();
        let s = Tensor::new(&[1, n], values).unwrap().softmax().unwrap().to_vec();
        let total: f64 = s.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn softmax_shift_invariant(values in row(), shift in -50.0f64..50.0) {
        let n = values.len();
        let shifted: Vec<f64> = values.iter().map(|v| v + shift).collect();
        let a = Tensor::new(&[n], values).unwrap().softmax().unwrap().to_vec();
        let b = Tensor::new(&[n], shifted).unwrap().softmax().unwrap().to_vec();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn double_use_gradient_is_sum_of_single_uses(
        values in prop::collection::vec(-2.0f64..2.0, 4),
        w in prop::collection::vec(-2.0f64..2.0, 4),
    ) {
        let x = Tensor::param(&[2, 2], values).unwrap();
        let w = Tensor::new(&[2, 2], w).unwrap();
        let first = || x.matmul(&w).unwrap().softmax().unwrap().sum_squares();
        let second = || x.mul(&w).unwrap().exp().sum();
        let g1 = backward(&first()).unwrap().get(&x).unwrap().to_vec();
        let g2 = backward(&second()).unwrap().get(&x).unwrap().to_vec();
        let both = backward(&first().add(&second()).unwrap()).unwrap().get(&x).unwrap().to_vec();
        for i in 0..4 {
            prop_assert_eq!(both[i], g1[i] + g2[i]);
        }
    }
}

#[test]
fn gradients_match_parameter_shapes() {
    let w = Tensor::param(&[3, 2], vec![0.1, -0.2, 0.3, 0.4, -0.5, 0.6]).unwrap();
    let b = Tensor::param(&[2], vec![0.0, 0.0]).unwrap();
    let x = Tensor::new(&[4, 3], (0..12).map(|i| i as f64 / 10.0).collect()).unwrap();
    let loss = x.matmul(&w).unwrap().add(&b).unwrap().log_softmax().unwrap().sum();
    let g = backward(&loss).unwrap();
    assert_eq!(g.len(), 2);
    assert_eq!(g.get(&w).unwrap().len(), 6);
    assert_eq!(g.get(&b).unwrap().len(), 2);
}

#[test]
fn identical_inputs_give_bitwise_identical_training() {
    let run = || {
        let w = Tensor::param(&[3, 3], (0..9).map(|i| ((i * 7) % 5) as f64 / 3.0 - 0.7).collect()).unwrap();
        let x = Tensor::new(&[2, 3], vec![0.5, -1.0, 2.0, 1.5, 0.0, -0.5]).unwrap();
        let mut adam = AdamState::new(std::slice::from_ref(&w), AdamConfig::default());
        let mut losses = Vec::new();
        for _ in 0..20 {
            let loss = x.matmul(&w).unwrap().softmax().unwrap().sum_squares();
            losses.push(loss.item().to_bits());
            let g = backward(&loss).unwrap();
            adam.step(std::slice::from_ref(&w), &g, 0.01).unwrap();
        }
        losses
    };
    assert_eq!(run(), run());
}
