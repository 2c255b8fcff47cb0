//! How-provenance for SPARQL queries.
//!
//! A query is compiled into relational algebra over two base relations,
//! `Graphs(gid, iri)` and `Quads(gid, sub, pred, obj)`, and evaluated over
//! K-relations whose annotations live in an m-semiring. Evaluating in the
//! free m-semiring yields a provenance term per answer; evaluating in ℕ
//! yields bag multiplicities; evaluating a term under a boolean assignment
//! tells whether the answer is trusted.
//!
//! ```
//! use sparqlprov::{parse_nquads, parse_query, run_provenance};
//!
//! let data = parse_nquads("<http://a> <http://p> <http://b> .\n").unwrap();
//! let query = parse_query("SELECT ?x WHERE { ?x <http://p> ?y }").unwrap();
//! let result = run_provenance(&query, &data).unwrap();
//! assert_eq!(result.rows[0].annotation.render(), "g0*t1");
//! ```

pub mod error;
pub mod krel;
pub mod provenance;
pub mod rdf;
pub mod refeval;
pub mod semiring;
pub mod sparql;
pub mod translate;
mod tree;

pub use error::{Error, HomError, QueryError, RaError, Result, SyntaxError};
pub use krel::{eval_ra, BaseAnnotations, KRelation, RAExpr, Value};
pub use provenance::{
    apply_trust, count_check, count_check_with, run_counts, run_provenance, AnnotatedResult, CountReport,
    TrustAssignment,
};
pub use rdf::{encode_dataset, parse_nquads, BaseDb, Dataset, RdfTerm};
pub use refeval::{Evaluator, ExistsSemantics, SolutionMapping, SolutionMultiset};
pub use semiring::{bool_semiring, hom_eval, nat_semiring, Homomorphism, MSemiring, ProvTerm};
pub use sparql::{parse_query, GraphPattern, Query, Var};
pub use translate::translate_query;
