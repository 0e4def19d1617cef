//! Sector interpolation of polynomial bounds (Phragmén–Lindelöf on the right half-plane).

mod aux;
mod bound;
mod certify;

pub use aux::{aux_h2, aux_h3, three_lines_g};
pub use bound::{effective_exponent, EPS_MAX, EPS_MIN, gamma_eps, pl_bound, sector_exponent, PolyBoundHypothesis};
pub use certify::{
    certify_pl, fit_a2, AnalyticWitness, CertStatus, Certification, ClosedFormWitness,
};
