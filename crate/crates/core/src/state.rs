// SPDX-License-Identifier: Apache-2.0

//! Current-value tracking over a VCD event stream, and sampling of the full
//! design state into [`TraceSample`]s.

use thiserror::Error;

use crate::encoding::{encode_word, EncodedValue};
use crate::vcd::{
    FourStateWord, LogicValue, LookupError, SignalId, TraceEvent, TraceHeader, VcdError,
};

#[derive(Debug, Error)]
pub enum TrackerError {
    #[error("event refers to signal #{index}, but the header declares {count}")]
    UnknownVariable { index: usize, count: usize },
    #[error("signal #{index} is {width} bits wide, change has {found} bits")]
    WidthMismatch { index: usize, width: usize, found: usize },
    #[error("no variable named `{0}` to use as the sampling clock")]
    NoSuchClock(String),
    #[error("clock name `{0}` matches more than one variable")]
    AmbiguousClock(String),
    #[error("clock `{name}` is {width} bits wide; a 1-bit signal is required")]
    NotAScalarClock { name: String, width: usize },
}

#[derive(Debug, Error)]
pub enum SampleError {
    #[error(transparent)]
    Vcd(#[from] VcdError),
    #[error(transparent)]
    Tracker(#[from] TrackerError),
}

/// Current value of every unique signal. Unassigned signals hold all-x.
#[derive(Debug, Clone)]
pub struct SignalState {
    values: Vec<FourStateWord>,
    encoded: Vec<EncodedValue>,
    time: u64,
    real_changes: u64,
}

impl SignalState {
    pub fn new(header: &TraceHeader) -> Self {
        SignalState {
            values: header.signals.iter().map(|s| FourStateWord::unknown(s.width)).collect(),
            encoded: vec![EncodedValue::Unknown; header.signals.len()],
            time: 0,
            real_changes: 0,
        }
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn value(&self, signal: SignalId) -> &FourStateWord {
        &self.values[signal.index()]
    }

    pub fn encoded(&self, signal: SignalId) -> &EncodedValue {
        &self.encoded[signal.index()]
    }

    /// Number of real-valued changes seen; those signals are held unknown.
    pub fn real_changes(&self) -> u64 {
        self.real_changes
    }

    fn slot(&self, signal: SignalId) -> Result<usize, TrackerError> {
        let index = signal.index();
        if index < self.values.len() {
            Ok(index)
        } else {
            Err(TrackerError::UnknownVariable {
                index,
                count: self.values.len(),
            })
        }
    }

    /// Applies one event. Returns whether it was a value change.
    pub fn apply_event(&mut self, event: &TraceEvent) -> Result<bool, TrackerError> {
        match event {
            TraceEvent::TimeAdvance(t) => {
                self.time = *t;
                Ok(false)
            }
            TraceEvent::ScalarChange(s, v) => {
                let i = self.slot(*s)?;
                let word = &mut self.values[i];
                if word.width() == 1 {
                    word.fill(*v);
                    self.encoded[i] = match v {
                        LogicValue::Zero => EncodedValue::known(0),
                        LogicValue::One => EncodedValue::known(1),
                        _ => EncodedValue::Unknown,
                    };
                } else {
                    let ext = crate::vcd::decode_value(&v.to_string(), word.width())
                        .expect("single digits always fit");
                    word.assign(&ext);
                    self.encoded[i] = encode_word(word);
                }
                Ok(true)
            }
            TraceEvent::VectorChange(s, w) => {
                let i = self.slot(*s)?;
                let word = &mut self.values[i];
                if word.width() != w.width() {
                    return Err(TrackerError::WidthMismatch {
                        index: i,
                        width: word.width(),
                        found: w.width(),
                    });
                }
                word.assign(w);
                self.encoded[i] = encode_word(word);
                Ok(true)
            }
            TraceEvent::RealChange(s, _) => {
                let i = self.slot(*s)?;
                self.values[i].fill(LogicValue::X);
                self.encoded[i] = EncodedValue::Unknown;
                self.real_changes += 1;
                Ok(true)
            }
            TraceEvent::DumpDirective(_) | TraceEvent::Warning(_) => Ok(false),
        }
    }
}

/// The full design state at one sampling point, one value per declared
/// variable in header order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceSample {
    pub time: u64,
    pub encoded: Vec<EncodedValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SamplingPolicy {
    #[default]
    EveryTimestamp,
    ClockRising(String),
    ClockFalling(String),
}

/// Sampling iterator produced by [`sample_stream`].
pub struct Samples<I> {
    events: I,
    state: SignalState,
    var_signals: Vec<SignalId>,
    clock: Option<(SignalId, LogicValue, LogicValue)>,
    prev_clock: LogicValue,
    dirty: bool,
    started: bool,
    finished: bool,
    warnings: u64,
}

/// Checks `policy` against `header` and returns the sampling iterator.
///
/// `EveryTimestamp` emits the state at the end of each timestamp that saw at
/// least one change. The clock policies emit the state at the end of each
/// timestamp where the clock went 0→1 (rising) or 1→0 (falling) relative to
/// the end of the previous timestamp.
pub fn sample_stream<I>(
    header: &TraceHeader,
    events: I,
    policy: &SamplingPolicy,
) -> Result<Samples<I>, TrackerError>
where
    I: Iterator<Item = Result<TraceEvent, VcdError>>,
{
    let clock = match policy {
        SamplingPolicy::EveryTimestamp => None,
        SamplingPolicy::ClockRising(name) | SamplingPolicy::ClockFalling(name) => {
            let index = header.find_variable(name).map_err(|e| match e {
                LookupError::Missing => TrackerError::NoSuchClock(name.clone()),
                LookupError::Ambiguous => TrackerError::AmbiguousClock(name.clone()),
            })?;
            let var = &header.variables[index];
            if var.width != 1 {
                return Err(TrackerError::NotAScalarClock {
                    name: var.name.clone(),
                    width: var.width,
                });
            }
            let (from, to) = match policy {
                SamplingPolicy::ClockRising(_) => (LogicValue::Zero, LogicValue::One),
                _ => (LogicValue::One, LogicValue::Zero),
            };
            Some((var.signal, from, to))
        }
    };
    Ok(Samples {
        events,
        state: SignalState::new(header),
        var_signals: header.variables.iter().map(|v| v.signal).collect(),
        clock,
        prev_clock: LogicValue::X,
        dirty: false,
        started: false,
        finished: false,
        warnings: 0,
    })
}

impl<I> Samples<I> {
    pub fn state(&self) -> &SignalState {
        &self.state
    }

    /// Recoverable warnings seen in the event stream so far.
    pub fn warnings(&self) -> u64 {
        self.warnings
    }

    fn snapshot(&self) -> TraceSample {
        TraceSample {
            time: self.state.time,
            encoded: self
                .var_signals
                .iter()
                .map(|s| self.state.encoded[s.index()].clone())
                .collect(),
        }
    }

    /// Ends the current timestamp; returns a sample if the policy fires.
    fn close_timestamp(&mut self) -> Option<TraceSample> {
        match self.clock {
            None => {
                let fire = self.dirty;
                self.dirty = false;
                fire.then(|| self.snapshot())
            }
            Some((signal, from, to)) => {
                let now = self.state.value(signal).bits()[0];
                let fire = self.prev_clock == from && now == to;
                self.prev_clock = now;
                fire.then(|| self.snapshot())
            }
        }
    }
}

impl<I> Iterator for Samples<I>
where
    I: Iterator<Item = Result<TraceEvent, VcdError>>,
{
    type Item = Result<TraceSample, SampleError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        loop {
            let event = match self.events.next() {
                None => {
                    self.finished = true;
                    return self.close_timestamp().map(Ok);
                }
                Some(Err(e)) => {
                    self.finished = true;
                    return Some(Err(e.into()));
                }
                Some(Ok(ev)) => ev,
            };
            match event {
                TraceEvent::TimeAdvance(t) => {
                    if self.started && t == self.state.time {
                        continue;
                    }
                    let sample = if self.started || self.dirty {
                        self.close_timestamp()
                    } else {
                        None
                    };
                    self.started = true;
                    self.state.time = t;
                    if let Some(s) = sample {
                        return Some(Ok(s));
                    }
                }
                TraceEvent::Warning(w) => {
                    self.warnings += 1;
                    log::warn!("{w}");
                }
                other => match self.state.apply_event(&other) {
                    Ok(changed) => self.dirty |= changed,
                    Err(e) => {
                        self.finished = true;
                        return Some(Err(e.into()));
                    }
                },
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vcd::open_trace;

    fn samples(text: &str, policy: SamplingPolicy) -> Vec<TraceSample> {
        let (h, ev) = open_trace(text.as_bytes()).unwrap();
        sample_stream(&h, ev, &policy)
            .unwrap()
            .collect::<Result<Vec<_>, _>>()
            .unwrap()
    }

    fn vals(s: &TraceSample) -> Vec<String> {
        s.encoded.iter().map(|v| v.to_string()).collect()
    }

    const ONE_VAR: &str = "$var wire 1 ! a $end $enddefinitions $end ";

    #[test]
    fn apply_event_examples() {
        let (h, _) = open_trace("$var wire 2 ! a $end $enddefinitions $end".as_bytes()).unwrap();
        let a = SignalId(0);
        let mut st = SignalState::new(&h);
        assert_eq!(st.value(a).to_string(), "xx");
        st.apply_event(&TraceEvent::ScalarChange(a, LogicValue::One)).unwrap();
        assert_eq!(st.value(a).to_string(), "01");
        st.apply_event(&TraceEvent::TimeAdvance(7)).unwrap();
        assert_eq!((st.time(), st.value(a).to_string()), (7, "01".into()));
        st.apply_event(&TraceEvent::VectorChange(a, FourStateWord::filled(2, LogicValue::Z)))
            .unwrap();
        assert_eq!(st.value(a).to_string(), "zz");
        assert_eq!(st.encoded(a), &EncodedValue::Unknown);
        assert!(matches!(
            st.apply_event(&TraceEvent::ScalarChange(SignalId(3), LogicValue::One)),
            Err(TrackerError::UnknownVariable { index: 3, count: 1 })
        ));
        assert!(matches!(
            st.apply_event(&TraceEvent::VectorChange(a, FourStateWord::unknown(3))),
            Err(TrackerError::WidthMismatch { .. })
        ));
    }

    #[test]
    fn every_timestamp_example() {
        let s = samples(&format!("{ONE_VAR}#0 1! #5 0!"), SamplingPolicy::EveryTimestamp);
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].time, vals(&s[0])), (0, vec!["1".to_string()]));
        assert_eq!((s[1].time, vals(&s[1])), (5, vec!["0".to_string()]));
    }

    #[test]
    fn empty_body_yields_nothing() {
        assert!(samples(ONE_VAR, SamplingPolicy::EveryTimestamp).is_empty());
        assert!(samples(&format!("{ONE_VAR}#0 #5"), SamplingPolicy::EveryTimestamp).is_empty());
    }

    #[test]
    fn quiet_timestamps_are_skipped() {
        let s = samples(&format!("{ONE_VAR}#0 1! #5 #9 0! #12"), SamplingPolicy::EveryTimestamp);
        assert_eq!(s.iter().map(|s| s.time).collect::<Vec<_>>(), [0, 9]);
    }

    #[test]
    fn changes_before_first_timestamp_count_as_time_zero() {
        let s = samples(&format!("{ONE_VAR}$dumpvars 1! $end #4 0!"), SamplingPolicy::EveryTimestamp);
        assert_eq!(s.iter().map(|s| s.time).collect::<Vec<_>>(), [0, 4]);
    }

    #[test]
    fn last_writer_wins_within_timestamp() {
        let s = samples(&format!("{ONE_VAR}#0 1! 0! 1! #3 0! 1!"), SamplingPolicy::EveryTimestamp);
        assert_eq!(vals(&s[0]), ["1"]);
        assert_eq!(vals(&s[1]), ["1"]);
    }

    #[test]
    fn rising_and_falling_edges() {
        let text = "$var wire 1 ! clk $end $var wire 4 \" d $end $enddefinitions $end
            #0 0! b0 \" #5 1! b1 \" #10 0! b10 \" #15 1! b11 \"";
        let rise = samples(text, SamplingPolicy::ClockRising("clk".into()));
        assert_eq!(rise.iter().map(|s| s.time).collect::<Vec<_>>(), [5, 15]);
        assert_eq!(vals(&rise[1]), ["1", "3"]);
        let fall = samples(text, SamplingPolicy::ClockFalling("clk".into()));
        assert_eq!(fall.iter().map(|s| s.time).collect::<Vec<_>>(), [10]);
    }

    #[test]
    fn unassigned_variables_stay_unknown() {
        let text = "$var wire 1 ! a $end $var wire 8 \" b $end $enddefinitions $end #0 1!";
        let s = samples(text, SamplingPolicy::EveryTimestamp);
        assert_eq!(vals(&s[0]), ["1", "-1"]);
    }

    #[test]
    fn aliases_update_together() {
        let text = "$scope module t $end $var wire 3 ! x $end $var wire 3 ! y $end $upscope $end
            $enddefinitions $end #0 b101 !";
        let s = samples(text, SamplingPolicy::EveryTimestamp);
        assert_eq!(vals(&s[0]), ["5", "5"]);
    }

    #[test]
    fn real_changes_are_unknown() {
        let text = "$var real 64 ! r $end $enddefinitions $end #0 r1.5 !";
        let s = samples(text, SamplingPolicy::EveryTimestamp);
        assert_eq!(vals(&s[0]), ["-1"]);
    }

    #[test]
    fn policy_validation() {
        let (h, ev) = open_trace(
            "$scope module a $end $var wire 1 ! clk $end $var wire 2 \" bus $end $upscope $end
             $scope module b $end $var wire 1 # clk $end $upscope $end $enddefinitions $end"
                .as_bytes(),
        )
        .unwrap();
        let err = |p: SamplingPolicy| sample_stream(&h, std::iter::empty(), &p).err().unwrap();
        assert!(matches!(err(SamplingPolicy::ClockRising("nope".into())), TrackerError::NoSuchClock(_)));
        assert!(matches!(err(SamplingPolicy::ClockRising("bus".into())), TrackerError::NotAScalarClock { width: 2, .. }));
        assert!(matches!(err(SamplingPolicy::ClockRising("clk".into())), TrackerError::AmbiguousClock(_)));
        assert!(sample_stream(&h, ev, &SamplingPolicy::ClockRising("a.clk".into())).is_ok());
    }
}
