//! The example protocols and process scripts shipped with the crate.

/// Simpler logging: trigger, then a client read or the handling of its crash.
pub const LOGGING_PROTOCOL: &str = include_str!("../../../protocols/logging.crmpst");
pub const LOGGING_PROCESSES: &str = include_str!("../../../protocols/logging.crproc");
/// Non-blocking atomic commit with an unreliable leader and failover.
pub const NBAC_PROTOCOL: &str = include_str!("../../../protocols/nbac.crmpst");
pub const NBAC_PROCESSES: &str = include_str!("../../../protocols/nbac.crproc");
/// A recursive logger with an unreliable user.
pub const SIMPLE_LOGGER_PROTOCOL: &str = include_str!("../../../protocols/simple_logger.crmpst");
/// Logging without the crash branch its unreliable client requires.
pub const BROKEN_PROTOCOL: &str = include_str!("../../../protocols/broken.crmpst");
pub const EMPTY_PROTOCOL: &str = include_str!("../../../protocols/empty.crmpst");
/// An unbounded producer whose queue outgrows any bound.
pub const PRODUCER_PROTOCOL: &str = include_str!("../../../protocols/producer-no-consumer.crmpst");
