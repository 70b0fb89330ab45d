//! Exact closed forms for repeated derivatives of composite functions.
//!
//! The crate builds symbolic expansions of `dⁿ/dxⁿ f(u(x))` for inner maps
//! `x²`, `x³`, `xᵐ`, `ax² + bx`, `√x` and `1/x` from Hermite–Kampé de Fériet
//! polynomials, generalizes them to products (`g(u)·h(u)`), and checks every
//! expansion against an independent truncated-power-series oracle.
//!
//! Module map:
//!
//! - [`exact_arith`]: rationals, factorials, binomials, half-integer Gamma.
//! - [`hkdf_poly`]: `Hₙ⁽ᵐ⁾` term maps, addition formula, generating functions.
//! - [`umbral_func`]: entire functions as coefficient sequences `fₙ`.
//! - [`derivative_rules`]: the single-function expansions and their evaluation.
//! - [`leibniz_product`]: product rules, the Γ-operator and `J₀²` derivatives.
//! - [`special_sequences`]: Bessel and Laguerre polynomials, generalized Stirling numbers.
//! - [`gamma_integral`]: Gaussian-type integrals of the Γ-operator.
//! - [`jet_oracle`]: Taylor-jet arithmetic used as the brute-force reference.
//! - [`cli`]: the `repdiff` command-line front end.

pub mod cli;
pub mod derivative_rules;
pub mod error;
pub mod exact_arith;
pub mod gamma_integral;
pub mod hkdf_poly;
pub mod jet_oracle;
pub mod leibniz_product;
pub mod quadrature;
pub mod series;
pub mod special_sequences;
pub mod umbral_func;

pub use error::{Error, Result};
pub use derivative_rules::{BaseVariable, DerivativeExpansion, ExpansionTerm, InnerMap};
pub use exact_arith::{HalfIntegerGamma, Rational};
pub use hkdf_poly::HkdfPoly;
pub use jet_oracle::TaylorJet;
pub use leibniz_product::{ProductExpansion, ProductExpansionTerm};
pub use umbral_func::UmbralFunction;
