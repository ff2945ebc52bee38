// SPDX-License-Identifier: Apache-2.0

//! Continuous-delivery glue: a hosted-CI workflow and a make fragment that
//! simulate the design, mine the trace, and publish the specification.
//!
//! Both documents are produced by filling `{{slot}}` placeholders in text
//! templates; a different CI dialect is a different [`Template`].

use std::io::{self, Write};

use serde::Deserialize;

use crate::state::SamplingPolicy;

pub const DEFAULT_SIMULATOR: &str = "iverilog {std} -o {top}.vvp {sources} && vvp {top}.vvp";
pub const DEFAULT_ARTIFACT: &str = "spec";

/// A text template with `{{name}}` slots.
#[derive(Debug, Clone, Copy)]
pub struct Template {
    pub name: &'static str,
    pub text: &'static str,
}

pub const GITHUB_ACTIONS: Template = Template {
    name: "github-actions",
    text: include_str!("../templates/github-actions.yml"),
};

pub const MAKE_FRAGMENT: Template = Template {
    name: "make",
    text: include_str!("../templates/make-fragment.mk"),
};

impl Template {
    /// Substitutes every slot; panics on a slot without a binding.
    pub fn fill(&self, bindings: &[(&str, &str)]) -> String {
        let mut out = String::with_capacity(self.text.len() + 256);
        let mut rest = self.text;
        while let Some(start) = rest.find("{{") {
            out.push_str(&rest[..start]);
            let end = rest[start..].find("}}").expect("unterminated template slot") + start;
            let slot = &rest[start + 2..end];
            let value = bindings
                .iter()
                .find(|(k, _)| *k == slot)
                .unwrap_or_else(|| panic!("template {} has unbound slot {slot}", self.name))
                .1;
            out.push_str(value);
            rest = &rest[end + 2..];
        }
        out.push_str(rest);
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CiError {
    #[error("invalid config: {0}")]
    Syntax(#[from] serde_yaml::Error),
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> CiError {
    CiError::InvalidConfig { field, reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    Rising,
    Falling,
}

/// Config document as written by the user; every field optional so that
/// validation can name what is missing.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawConfig {
    design: Vec<String>,
    testbench: Vec<String>,
    top: Option<String>,
    simulator: Option<String>,
    std: Option<String>,
    image: Option<String>,
    clock: Option<String>,
    edge: Option<Edge>,
    artifact: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub design: Vec<String>,
    pub testbench: Vec<String>,
    pub top: String,
    /// Simulator command with `{std}`, `{top}` and `{sources}` slots.
    pub simulator: String,
    /// Language-standard flag such as `-g2012`.
    pub std_flag: Option<String>,
    pub image: String,
    pub sampling: SamplingPolicy,
    pub artifact: String,
}

fn is_safe_name(s: &str) -> bool {
    !s.is_empty()
        && !s.starts_with(['.', '-'])
        && s.bytes().all(|b| b.is_ascii_alphanumeric() || b"._-".contains(&b))
}

fn is_safe_path(s: &str) -> bool {
    !s.is_empty()
        && !s.starts_with('-')
        && s.bytes().all(|b| b.is_ascii_graphic() && !b"\"'`$#:;\\=%".contains(&b))
}

fn check_files(field: &'static str, files: &[String]) -> Result<(), CiError> {
    if files.is_empty() {
        return Err(invalid(field, "needs at least one file"));
    }
    match files.iter().find(|f| !is_safe_path(f)) {
        Some(f) => Err(invalid(field, format!("unsupported file name {f:?}"))),
        None => Ok(()),
    }
}

impl PipelineConfig {
    pub fn from_yaml(text: &str) -> Result<Self, CiError> {
        let raw: RawConfig = serde_yaml::from_str(text)?;
        check_files("design", &raw.design)?;
        check_files("testbench", &raw.testbench)?;

        let top = raw.top.ok_or_else(|| invalid("top", "missing"))?;
        if !is_safe_name(&top) {
            return Err(invalid("top", format!("{top:?} is not a plain module name")));
        }
        let image = raw.image.ok_or_else(|| invalid("image", "missing"))?;
        if image.trim().is_empty() || image.contains(char::is_whitespace) {
            return Err(invalid("image", format!("{image:?} is not an image reference")));
        }
        let artifact = raw.artifact.unwrap_or_else(|| DEFAULT_ARTIFACT.to_string());
        if !is_safe_name(&artifact) {
            return Err(invalid("artifact", format!("{artifact:?} is not filesystem-safe")));
        }
        let simulator = raw.simulator.unwrap_or_else(|| DEFAULT_SIMULATOR.to_string());
        if simulator.trim().is_empty() || simulator.contains('\n') {
            return Err(invalid("simulator", "must be a single non-empty line"));
        }
        if let Some(std) = &raw.std {
            if std.is_empty() || !std.bytes().all(|b| b.is_ascii_graphic()) {
                return Err(invalid("std", format!("{std:?} is not a single flag")));
            }
        }
        let sampling = match (raw.clock, raw.edge) {
            (None, None) => SamplingPolicy::EveryTimestamp,
            (None, Some(_)) => return Err(invalid("edge", "requires `clock`")),
            (Some(c), _) if !is_safe_path(&c) => {
                return Err(invalid("clock", format!("{c:?} is not a signal name")))
            }
            (Some(c), None | Some(Edge::Rising)) => SamplingPolicy::ClockRising(c),
            (Some(c), Some(Edge::Falling)) => SamplingPolicy::ClockFalling(c),
        };
        Ok(PipelineConfig {
            design: raw.design,
            testbench: raw.testbench,
            top,
            simulator,
            std_flag: raw.std,
            image,
            sampling,
            artifact,
        })
    }

    pub fn vcd_file(&self) -> String {
        format!("{}.vcd", self.top)
    }

    pub fn spec_file(&self) -> String {
        format!("{}.txt", self.artifact)
    }

    fn sources(&self) -> String {
        self.design.iter().chain(&self.testbench).cloned().collect::<Vec<_>>().join(" ")
    }

    pub fn simulator_command(&self) -> String {
        let template = match &self.std_flag {
            Some(_) => self.simulator.clone(),
            None => self.simulator.replace("{std} ", "").replace(" {std}", ""),
        };
        template
            .replace("{std}", self.std_flag.as_deref().unwrap_or(""))
            .replace("{top}", &self.top)
            .replace("{sources}", &self.sources())
    }

    pub fn mine_command(&self) -> String {
        let mut cmd = format!("rtlspec mine {} -o {}", self.vcd_file(), self.spec_file());
        match &self.sampling {
            SamplingPolicy::EveryTimestamp => cmd.push_str(" --every-timestamp"),
            SamplingPolicy::ClockRising(c) => cmd.push_str(&format!(" --clock {c} --edge rising")),
            SamplingPolicy::ClockFalling(c) => cmd.push_str(&format!(" --clock {c} --edge falling")),
        }
        cmd
    }
}

/// Double-quoted YAML scalar.
fn yaml_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn render_workflow_with(config: &PipelineConfig, template: &Template) -> String {
    let simulate = format!("make {}", config.vcd_file());
    template.fill(&[
        ("image", &yaml_quote(&config.image)),
        ("simulate", &yaml_quote(&simulate)),
        ("mine", &yaml_quote(&config.mine_command())),
        ("artifact", &yaml_quote(&config.artifact)),
        ("spec_file", &yaml_quote(&config.spec_file())),
    ])
}

pub fn emit_workflow<W: Write>(config: &PipelineConfig, sink: &mut W) -> Result<(), CiError> {
    sink.write_all(render_workflow_with(config, &GITHUB_ACTIONS).as_bytes())?;
    Ok(())
}

pub fn render_make_fragment(config: &PipelineConfig) -> String {
    MAKE_FRAGMENT.fill(&[
        ("vcd", &config.vcd_file()),
        ("sources", &config.sources()),
        ("simulator", &config.simulator_command()),
        ("spec_file", &config.spec_file()),
        ("mine", &config.mine_command()),
    ])
}

pub fn emit_make_fragment<W: Write>(config: &PipelineConfig, sink: &mut W) -> Result<(), CiError> {
    sink.write_all(render_make_fragment(config).as_bytes())?;
    Ok(())
}
