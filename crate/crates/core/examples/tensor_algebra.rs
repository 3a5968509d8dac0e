//! Truncated tensor algebra: segment signatures, Chen products and inverses.

use sigwin::{segment_signature, TruncatedTensorSeq};

fn main() -> sigwin::Result<()> {
    // Two straight segments in the plane, truncated at level 3.
    let a = segment_signature(&[1.0, 0.0], 3)?;
    let b = segment_signature(&[0.0, 1.0], 3)?;
    let ab = a.product(&b)?;

    println!("S(a ⊗ b), d = {}, N = {}", ab.dim(), ab.order());
    for k in 0..=ab.order() {
        println!("  level {k}: {:?}", ab.level(k));
    }
    // Levy area of the L-shaped path: (S(1,2) - S(2,1)) / 2.
    println!(
        "Levy area: {}",
        0.5 * (ab.coeff(&[0, 1]) - ab.coeff(&[1, 0]))
    );

    let back = ab.product(&ab.group_inverse()?)?;
    let e = TruncatedTensorSeq::neutral(2, 3)?;
    println!("|S ⊗ S^-1 - 1| = {:e}", back.max_relative_error(&e));
    println!("is group element: {}", ab.is_group_element());
    Ok(())
}
