//! The worked example: a six-sequence initial database, two increments and
//! the item weight table.

use crate::io::{parse_usf_str, parse_weights_str};
use crate::model::{UncertainDatabase, WeightTable};

pub const INITIAL_USF: &str = include_str!("../fixtures/initial.usf");
pub const DELTA1_USF: &str = include_str!("../fixtures/delta1.usf");
pub const DELTA2_USF: &str = include_str!("../fixtures/delta2.usf");
pub const WEIGHTS_TXT: &str = include_str!("../fixtures/weights.txt");

pub fn initial_db() -> UncertainDatabase {
    parse_usf_str(INITIAL_USF).expect("bundled fixture parses")
}

pub fn delta1() -> UncertainDatabase {
    parse_usf_str(DELTA1_USF).expect("bundled fixture parses")
}

pub fn delta2() -> UncertainDatabase {
    parse_usf_str(DELTA2_USF).expect("bundled fixture parses")
}

/// All thirteen sequences in arrival order.
pub fn full_db() -> UncertainDatabase {
    let mut db = initial_db();
    db.extend(&delta1());
    db.extend(&delta2());
    db
}

pub fn weights() -> WeightTable {
    parse_weights_str(WEIGHTS_TXT).expect("bundled fixture parses")
}
