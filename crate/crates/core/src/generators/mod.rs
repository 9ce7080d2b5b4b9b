//! Synthetic point families: discrete Cantor sets and products, lattices, the
//! densified-plane lattice, Weierstrass graphs and generic function graphs.

mod cantor;
mod lattice;
mod weierstrass;

use serde::{Deserialize, Serialize};

pub use cantor::{cantor_coordinates, cartesian_product, gen_cantor, gen_cantor_product, CantorParams};
pub use lattice::{gen_adversarial_lattice, gen_graph_from_fn, gen_graph_from_samples, gen_lattice};
pub use weierstrass::{default_terms, gen_weierstrass_graph, holder_exponent, WeierstrassParams};

use crate::error::Result;
use crate::geometry::PointSet;
pub use crate::geometry::{load_csv, save_csv};

fn default_true() -> bool {
    true
}

/// A generator invocation as it appears in a JSON parameter file, e.g.
/// `{"type":"cantor_product","factors":[{"m":2,"n":4,"k":6,"kept":[0,2]}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Cantor {
        m: usize,
        n: usize,
        k: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kept: Option<Vec<usize>>,
    },
    CantorProduct {
        factors: Vec<CantorParams>,
    },
    Lattice {
        d: usize,
        q: usize,
    },
    AdversarialLattice {
        d: usize,
        q: usize,
        k: usize,
        m: usize,
    },
    Weierstrass {
        a: f64,
        b: f64,
        seed: u64,
        d: usize,
        q: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        terms: Option<usize>,
        #[serde(default = "default_true")]
        rescale: bool,
    },
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<PointSet> {
        match self {
            Self::Cantor { m, n, k, kept } => {
                let mut p = CantorParams::new(*m, *n, *k);
                p.kept = kept.clone();
                gen_cantor(&p)
            }
            Self::CantorProduct { factors } => gen_cantor_product(factors),
            Self::Lattice { d, q } => gen_lattice(*d, *q),
            Self::AdversarialLattice { d, q, k, m } => gen_adversarial_lattice(*d, *q, *k, *m),
            Self::Weierstrass {
                a,
                b,
                seed,
                d,
                q,
                terms,
                rescale,
            } => {
                let params = WeierstrassParams::seeded(*a, *b, *seed, *terms)?;
                gen_weierstrass_graph(&params, *d, *q, *rescale)
            }
        }
    }

    /// Seed driving pseudorandom choices, if any.
    pub fn seed(&self) -> Option<u64> {
        match self {
            Self::Weierstrass { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_parameter_files() {
        let spec: GeneratorSpec = serde_json::from_str(
            r#"{"type":"cantor_product","factors":[{"m":2,"n":4,"k":2,"kept":[0,2]},{"m":2,"n":4,"k":2}]}"#,
        )
        .unwrap();
        assert_eq!(spec.generate().unwrap().len(), 64);

        let spec: GeneratorSpec = serde_json::from_str(r#"{"type":"cantor","m":2,"n":4,"k":6}"#).unwrap();
        assert_eq!(spec.generate().unwrap().len(), 128);

        let spec: GeneratorSpec =
            serde_json::from_str(r#"{"type":"weierstrass","a":0.5,"b":3,"seed":7,"d":2,"q":16}"#).unwrap();
        assert_eq!(spec.seed(), Some(7));
        let ps = spec.generate().unwrap();
        assert!(ps.iter().all(|p| (0.0..=1.0).contains(&p[1])));

        let spec: GeneratorSpec =
            serde_json::from_str(r#"{"type":"adversarial_lattice","d":2,"q":10,"k":1,"m":50}"#).unwrap();
        assert_eq!(spec.generate().unwrap().len(), 140);

        let text = serde_json::to_string(&GeneratorSpec::Lattice { d: 2, q: 3 }).unwrap();
        assert_eq!(text, r#"{"type":"lattice","d":2,"q":3}"#);

        assert!(serde_json::from_str::<GeneratorSpec>(r#"{"type":"lattice","d":2}"#).is_err());
        assert!(serde_json::from_str::<GeneratorSpec>(r#"{"type":"spiral","d":2}"#).is_err());
    }
}
