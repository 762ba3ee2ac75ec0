//! Covariant derivatives and curvature of non-linear (Ehresmann), principal
//! and linear connections on a single trivialized bundle patch, together with
//! numerical checks of the identities relating them.
//!
//! All fields (Christoffel symbols, sections, vector fields, gauge
//! potentials) are [`expr::Expr`] trees; derivatives are taken with the
//! forward-mode jets of [`numcore`].
//!
//! ```
//! use conncurv::bundle::{BundlePatch, ChristoffelField};
//! use conncurv::EvalPoint;
//!
//! let patch = BundlePatch::new(2, 1).unwrap();
//! let g = ChristoffelField::parse(patch, &[vec!["0", "x1"]]).unwrap();
//! let r = g.curvature_coefficients(&EvalPoint::new(vec![0.3, 0.1], vec![2.0])).unwrap();
//! assert_eq!(r.get(0, 0, 1), 1.0);
//! ```

pub mod bundle;
pub mod error;
pub mod expr;
pub mod lie;
pub mod linear;
pub mod numcore;
pub mod principal;
pub mod prolong;
pub mod sampling;

pub use error::{Error, Result};
pub use expr::{parse, Dims, Expr, Var};
pub use numcore::{EvalPoint, Jet2};
