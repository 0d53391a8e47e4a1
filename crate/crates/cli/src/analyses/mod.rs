mod class_a;
mod model;
mod quadratic;
mod symbolic;

use crate::analysis::Analysis;

/// Every analysis, in the order shown by `--help`.
pub fn registry() -> Vec<Box<dyn Analysis>> {
    vec![
        Box::new(symbolic::Zeck),
        Box::new(symbolic::Knead),
        Box::new(symbolic::Entropy),
        Box::new(quadratic::FindC),
        Box::new(quadratic::Verify),
        Box::new(model::Model),
        Box::new(quadratic::Cover),
        Box::new(quadratic::Scaling),
        Box::new(quadratic::Growth),
        Box::new(quadratic::Series),
        Box::new(quadratic::Dimension),
        Box::new(class_a::Example),
        Box::new(class_a::Tune),
        Box::new(class_a::Renorm),
        Box::new(class_a::Geometry),
    ]
}
