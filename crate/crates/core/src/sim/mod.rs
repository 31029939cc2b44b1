//! Ground truth generation and the sensor → filter scenario loop.

mod scenario;
mod trajectory;

pub use scenario::{
    run_scenario, FilterConfig, MeasurementRecord, RunLog, ScenarioConfig, SensorRates,
    SensorSuiteParams, TickRecord,
};
pub use trajectory::{
    build_rectangle_trajectory, build_rectangle_trajectory_with, MotionLimits, RectangleSpec,
    Trajectory, Waypoint,
};
