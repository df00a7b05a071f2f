//! Closed-form reference data the identity suite compares the library
//! against: the exchange matrix on the odd-parity word basis and the eight
//! labeled eigenstate expansions of an axial cell.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::Matrix4;
use vortexq::C64;

/// Exchange matrix of the counterclockwise (3,1) move on the odd-parity
/// word basis `(a, ad_a_b, a_ad_b, ad)`.
pub fn exchange_matrix(phi: f64) -> Matrix4<C64> {
    let p = |k: f64| C64::from_polar(0.5, k * phi);
    Matrix4::new(
        p(0.0), -p(-1.0), -p(-1.0), -p(-2.0),
        p(1.0), p(0.0), -p(0.0), p(-1.0),
        p(1.0), -p(0.0), p(0.0), p(-1.0),
        -p(2.0), -p(1.0), -p(1.0), p(0.0),
    )
}

/// One labeled eigenstate expansion: `(label, energy sign, parity,
/// occupation-index amplitudes)` with index `4 n1 + 2 n2 + n3`.
pub type TableRow = (&'static str, i32, i32, [(usize, C64); 2]);

/// Hand expansions of the eight axial-cell eigenstates at azimuth `phi`.
pub fn eigenstate_rows(phi: f64) -> [TableRow; 8] {
    let r = FRAC_1_SQRT_2;
    let u = C64::from_polar(r, -phi);
    let v = C64::from_polar(r, phi);
    let i = C64::new(0.0, 1.0);
    let h = C64::new(r, 0.0);
    [
        ("a", -1, -1, [(4, u), (2, u * i)]),
        ("a_ad_b", -1, -1, [(1, h), (7, -h * i)]),
        ("a_ad", -1, 1, [(0, h), (6, -h * i)]),
        ("a_b", -1, 1, [(5, u), (3, u * i)]),
        ("ad", 1, -1, [(4, v), (2, -v * i)]),
        ("ad_a_b", 1, -1, [(1, h), (7, h * i)]),
        ("ad_a", 1, 1, [(0, h), (6, h * i)]),
        ("ad_b", 1, 1, [(5, v), (3, -v * i)]),
    ]
}
