//! Small reference networks with hand-checkable posteriors.

use crate::network::{BayesianNetwork, NetworkBuilder};

/// A→B→C, binary. Pr(A=1)=0.3; Pr(B=1|A)=0.2,0.7; Pr(C=1|B)=0.4,0.9.
pub fn chain3() -> BayesianNetwork {
    NetworkBuilder::new("chain3")
        .binary("A")
        .binary("B")
        .binary("C")
        .parents("B", &["A"])
        .parents("C", &["B"])
        .cpt("A", &[0.7, 0.3])
        .cpt("B", &[0.8, 0.2, 0.3, 0.7])
        .cpt("C", &[0.6, 0.4, 0.1, 0.9])
        .build()
        .expect("chain3 fixture")
}

/// A→E←B, binary. Pr(A=1)=Pr(B=1)=0.5; Pr(E=1|A,B)=0.1,0.6,0.6,0.9.
pub fn collider() -> BayesianNetwork {
    NetworkBuilder::new("collider")
        .binary("A")
        .binary("B")
        .binary("E")
        .parents("E", &["A", "B"])
        .cpt("A", &[0.5, 0.5])
        .cpt("B", &[0.5, 0.5])
        .cpt("E", &[0.9, 0.1, 0.4, 0.6, 0.4, 0.6, 0.1, 0.9])
        .build()
        .expect("collider fixture")
}

/// A→E←B where E=1 is likely exactly when A and B disagree.
///
/// Observing E=1 couples A and B; the coupling (and with it the divergence
/// floor of any sampler that keeps A and B independent) grows with
/// `strength` ∈ [0.5, 1).
pub fn xor_collider(strength: f64) -> BayesianNetwork {
    let s = strength;
    NetworkBuilder::new("xor_collider")
        .binary("A")
        .binary("B")
        .binary("E")
        .parents("E", &["A", "B"])
        .cpt("A", &[0.5, 0.5])
        .cpt("B", &[0.5, 0.5])
        .cpt("E", &[s, 1.0 - s, 1.0 - s, s, 1.0 - s, s, s, 1.0 - s])
        .build()
        .expect("xor collider fixture")
}

/// R1→X←R2, X→Y, with observations meant for the roots R1 and R2.
pub fn rooted() -> BayesianNetwork {
    NetworkBuilder::new("rooted")
        .binary("R1")
        .binary("R2")
        .variable("X", &["lo", "mid", "hi"])
        .binary("Y")
        .parents("X", &["R1", "R2"])
        .parents("Y", &["X"])
        .cpt("R1", &[0.35, 0.65])
        .cpt("R2", &[0.8, 0.2])
        .cpt(
            "X",
            &[
                0.2, 0.5, 0.3, //
                0.6, 0.3, 0.1, //
                0.1, 0.1, 0.8, //
                0.3, 0.3, 0.4,
            ],
        )
        .cpt("Y", &[0.9, 0.1, 0.5, 0.5, 0.2, 0.8])
        .build()
        .expect("rooted fixture")
}
