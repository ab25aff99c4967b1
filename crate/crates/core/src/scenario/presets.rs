//! Scenario files from `presets/`, embedded at build time.

include!(concat!(env!("OUT_DIR"), "/presets.rs"));

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}
