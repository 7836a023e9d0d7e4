//! Small built-in instances.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::{CandidateSolution, CcpInstance, InstanceData};
use crate::rational::Rational;

/// Three rows, seven equally likely scenarios, `eps = 4/7`, `T = I`, `x >= 0`.
/// Its optimum is 59.
pub fn example1() -> CcpInstance {
    let scenarios: Vec<Vec<f64>> = [
        [2.0, 1.0, 12.0],
        [3.0, 1.0, 10.0],
        [4.0, 2.0, 7.0],
        [5.0, 2.0, 6.0],
        [6.0, 2.0, 6.0],
        [7.0, 1.0, 4.0],
        [12.0, 1.0, 2.0],
    ]
    .iter()
    .map(|s| s.to_vec())
    .collect();
    let seventh = Rational::new(1, 7).unwrap();
    CcpInstance::new(InstanceData {
        name: String::from("example1"),
        cost: vec![6.0, 1.0, 3.0],
        tech: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        constraints: Vec::new(),
        lower: vec![0.0; 3],
        upper: vec![f64::INFINITY; 3],
        scenarios,
        probs: vec![seventh; 7],
        epsilon: Rational::new(4, 7).unwrap(),
        metadata: Default::default(),
    })
    .expect("built-in instance is valid")
}

/// The optimal point of [`example1`]: `x = (6, 2, 7)`, scenarios 0, 1, 5 and 6 violated.
pub fn example1_optimum() -> CandidateSolution {
    let inst = example1();
    CandidateSolution::from_x(
        &inst,
        vec![6.0, 2.0, 7.0],
        vec![true, true, false, false, false, true, true],
    )
}
