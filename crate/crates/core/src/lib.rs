pub mod gfq;
pub mod localring;
pub mod weights;
pub mod induction;
pub mod linalg;
pub mod invariants;
pub mod report;
pub mod checks;
pub mod quotient;
