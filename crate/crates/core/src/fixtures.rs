//! The bundled example models and traces.

use crate::dsl::parse_source;
use crate::model::Model;

pub const TRAFFICLIGHT: &str = include_str!("../fixtures/trafficlight.tsm");
pub const MYTODO: &str = include_str!("../fixtures/mytodo.tsm");
/// myTodo extended with an `Expire` action that marks todos delayed.
pub const MYTODO_EXPIRE: &str = include_str!("../fixtures/mytodo_expire.tsm");

/// Four timer flips from the initial state, with the expected lights.
pub const TRAFFICLIGHT_CYCLE_TRACE: &str = include_str!("../fixtures/trafficlight_cycle.json");
pub const TRAFFICLIGHT_MANUALSWITCH_TRACE: &str = include_str!("../fixtures/trafficlight_manualswitch.json");
/// Ten steps through every transition case of myTodo.
pub const MYTODO_GOLDEN_TRACE: &str = include_str!("../fixtures/mytodo_golden.json");
/// A system where a delayed todo cannot be removed, unlike the model.
pub const MYTODO_PREDICTION_TRACE: &str = include_str!("../fixtures/mytodo_prediction.json");

fn load(file: &str, source: &str) -> Model {
    match parse_source(file, source) {
        Ok(m) => m,
        Err(diags) => panic!("bundled fixture {file} does not parse: {diags:?}"),
    }
}

pub fn trafficlight() -> Model {
    load("trafficlight.tsm", TRAFFICLIGHT)
}

pub fn mytodo() -> Model {
    load("mytodo.tsm", MYTODO)
}

pub fn mytodo_expire() -> Model {
    load("mytodo_expire.tsm", MYTODO_EXPIRE)
}
