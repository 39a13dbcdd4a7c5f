//! Cartier operator by basis decomposition in one variable, independent of
//! the `d^{p-1}` coordinate formula.
//!
//! Every 1-form splits as `du + sum_m g_m^p x^{p-1} dx`: a monomial
//! `c x^a dx` is exact when `p` does not divide `a + 1`, and otherwise equals
//! `(c^{1/p} x^m)^p x^{p-1} dx` with `a = pm + p - 1`. The Cartier operator
//! kills the exact part and sends `g^p x^{p-1} dx` to `g dx`.

use crate::error::{Error, Result};
use crate::poly::{d0, MPoly, OneForm};

/// The two summands of the decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    /// A primitive of the exact part.
    pub primitive: MPoly,
    /// `g` with non-exact part `g^p x^{p-1} dx`.
    pub root: MPoly,
}

pub fn decompose(w: &OneForm) -> Result<Decomposition> {
    let ring = w.ring();
    if ring.nvars() != 1 {
        return Err(Error::Invalid("the decomposition oracle works in one variable".into()));
    }
    let field = ring.field();
    let p = field.p() as i32;
    let mut primitive = MPoly::zero(ring);
    let mut root = MPoly::zero(ring);
    for (e, c) in w.comp(0).terms() {
        let a = e[0];
        if (a + 1).rem_euclid(p) == 0 {
            let m = (a + 1).div_euclid(p) - 1;
            root = &root + &MPoly::monomial(ring, vec![m], field.pth_root(c));
        } else {
            let k = field.inv(field.from_int((a + 1) as i64)).expect("a + 1 is a unit");
            primitive = &primitive + &MPoly::monomial(ring, vec![a + 1], field.mul(c, k));
        }
    }
    Ok(Decomposition { primitive, root })
}

/// Reassembles the form from its decomposition; used as a certificate.
pub fn recompose(d: &Decomposition) -> OneForm {
    let ring = d.root.ring();
    let twist = MPoly::var(ring, 0).pow(ring.p() - 1);
    let rest = OneForm::basic(ring, 0, &d.root.frobenius() * &twist);
    let exact = d0(&d.primitive);
    OneForm::new(ring, vec![exact.comp(0) + rest.comp(0)]).expect("one variable")
}

pub fn cartier_by_decomposition(w: &OneForm) -> Result<OneForm> {
    let dec = decompose(w)?;
    if recompose(&dec) != *w {
        return Err(Error::Invalid("decomposition does not reassemble the input".into()));
    }
    Ok(OneForm::basic(w.ring(), 0, dec.root))
}
