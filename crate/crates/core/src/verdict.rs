//! Verdicts and machine-checkable witnesses.

use std::fmt;

/// The decidable questions this crate answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    Determinism,
    Isd,
    Sd,
    Esd,
    Wd,
    Wad,
    Prompt,
    OmegaNonempty,
}

impl Property {
    pub fn tag(&self) -> &'static str {
        match self {
            Property::Determinism => "determinism",
            Property::Isd => "isd",
            Property::Sd => "sd",
            Property::Esd => "esd",
            Property::Wd => "wd",
            Property::Wad => "wad",
            Property::Prompt => "prompt",
            Property::OmegaNonempty => "omega-nonempty",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Property> {
        Some(match tag {
            "determinism" => Property::Determinism,
            "isd" => Property::Isd,
            "sd" => Property::Sd,
            "esd" => Property::Esd,
            "wd" => Property::Wd,
            "wad" => Property::Wad,
            "prompt" => Property::Prompt,
            "omega-nonempty" => Property::OmegaNonempty,
            _ => return None,
        })
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Three-valued outcome: budgeted searches may be inconclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Holds,
    Fails,
    Unknown,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Holds => "holds",
            Outcome::Fails => "fails",
            Outcome::Unknown => "unknown",
        })
    }
}

/// One transition of a run. For Petri nets the states are marking names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub from: String,
    pub event: String,
    pub to: String,
}

impl Step {
    pub fn new(from: &str, event: &str, to: &str) -> Step {
        Step {
            from: from.to_owned(),
            event: event.to_owned(),
            to: to.to_owned(),
        }
    }
}

/// A finite run with an optional repeatable tail segment. For graph-level
/// witnesses the tail is a cycle; for unbounded-net witnesses it is a
/// repetitive firing sequence (end marking dominates start marking).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunWitness {
    pub stem: Vec<Step>,
    pub cycle: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Steps in the model the verdict is about.
    Run(RunWitness),
    /// Steps in the accessible concurrent composition of the model; state and
    /// event ids are the synthesized pair ids.
    PairRun(RunWitness),
    /// An observation-level witness: a label word, lasso-shaped when the
    /// cycle part is non-empty.
    Labels {
        stem: Vec<String>,
        cycle: Vec<String>,
    },
}

/// The result of a check: property, outcome, optional witness, and a note
/// naming the satisfied or violated characterization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub property: Property,
    pub outcome: Outcome,
    pub witness: Option<Witness>,
    pub note: String,
}

impl Verdict {
    pub fn holds(property: Property, note: impl Into<String>) -> Verdict {
        Verdict {
            property,
            outcome: Outcome::Holds,
            witness: None,
            note: note.into(),
        }
    }

    pub fn fails(property: Property, note: impl Into<String>) -> Verdict {
        Verdict {
            property,
            outcome: Outcome::Fails,
            witness: None,
            note: note.into(),
        }
    }

    pub fn unknown(property: Property, note: impl Into<String>) -> Verdict {
        Verdict {
            property,
            outcome: Outcome::Unknown,
            witness: None,
            note: note.into(),
        }
    }

    pub fn with_witness(mut self, witness: Witness) -> Verdict {
        self.witness = Some(witness);
        self
    }
}

fn render_run(out: &mut String, run: &RunWitness) {
    for s in &run.stem {
        out.push_str(&format!("step: {} {} {}\n", s.from, s.event, s.to));
    }
    if !run.cycle.is_empty() {
        out.push_str("loop:\n");
        for s in &run.cycle {
            out.push_str(&format!("step: {} {} {}\n", s.from, s.event, s.to));
        }
    }
}

/// Renders a verdict as the key-value report emitted by the CLI.
pub fn render_report(v: &Verdict, include_witness: bool) -> String {
    let mut out = String::new();
    out.push_str(&format!("property: {}\n", v.property));
    out.push_str(&format!("result: {}\n", v.outcome));
    if !v.note.is_empty() {
        out.push_str(&format!("note: {}\n", v.note));
    }
    if include_witness {
        if let Some(w) = &v.witness {
            out.push_str("witness:\n");
            match w {
                Witness::Run(run) => render_run(&mut out, run),
                Witness::PairRun(run) => {
                    out.push_str("pair-composition:\n");
                    render_run(&mut out, run);
                }
                Witness::Labels { stem, cycle } => {
                    for l in stem {
                        out.push_str(&format!("obs: {}\n", l));
                    }
                    if !cycle.is_empty() {
                        out.push_str("loop:\n");
                        for l in cycle {
                            out.push_str(&format!("obs: {}\n", l));
                        }
                    }
                }
            }
        }
    }
    out
}
