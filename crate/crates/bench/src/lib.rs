//! Shared inputs for the criterion benchmarks.

use sparqlprov::{parse_nquads, parse_query, Dataset, ProvTerm, Query};

pub const ACCOUNTS_QUERY: &str = "PREFIX foaf: <http://xmlns.com/foaf/0.1/>
SELECT * WHERE {
  ?who foaf:account ?acc
  OPTIONAL { ?acc foaf:accountServiceHomepage ?home }
}";

pub const NAMED_GRAPH_QUERY: &str = "PREFIX foaf: <http://xmlns.com/foaf/0.1/>
SELECT ?p ?acc ?src WHERE {
  GRAPH ?src { ?p foaf:account ?acc }
  FILTER NOT EXISTS { ?acc foaf:accountServiceHomepage ?home }
}";

/// `people` account holders spread over four named graphs plus the default
/// graph; every third account has a homepage.
pub fn accounts_dataset(people: usize) -> Dataset {
    let mut nq = String::new();
    for i in 0..people {
        let acc = i % (people / 2 + 1);
        let graph = match i % 5 {
            0 => String::new(),
            g => format!(" <http://ex/graph{g}>"),
        };
        nq.push_str(&format!(
            "<http://ex/person{i}> <http://xmlns.com/foaf/0.1/account> <http://ex/acc{acc}>{graph} .\n"
        ));
        if i % 3 == 0 {
            nq.push_str(&format!(
                "<http://ex/acc{acc}> <http://xmlns.com/foaf/0.1/accountServiceHomepage> <http://ex/home{i}>{graph} .\n"
            ));
        }
    }
    parse_nquads(&nq).expect("generated data parses")
}

pub fn query(text: &str) -> Query {
    parse_query(text).expect("benchmark query parses")
}

/// A balanced term of the given depth mixing every operator, with
/// repeated identifiers so that normalization has work to do.
pub fn nested_term(depth: u32) -> ProvTerm {
    fn go(depth: u32, seed: u32) -> ProvTerm {
        if depth == 0 {
            return ProvTerm::id(format!("t{}", seed % 7));
        }
        let (a, b) = (go(depth - 1, seed * 2 + 1), go(depth - 1, seed * 3 + 2));
        match (depth + seed) % 4 {
            0 => ProvTerm::add(a, b),
            1 => ProvTerm::mul(a, b),
            2 => ProvTerm::monus(a, b),
            _ => ProvTerm::add(ProvTerm::delta(a), ProvTerm::mul(b, ProvTerm::One)),
        }
    }
    go(depth, 1)
}
