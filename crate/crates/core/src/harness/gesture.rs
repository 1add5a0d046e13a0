use crate::device::FingerIntent;
use crate::error::{contract, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakpoint {
    /// s.
    pub time: f64,
    /// mm.
    pub target_gap: f64,
    pub rigidity_intent: f64,
}

/// Anything that tells the virtual finger what to do at a sensor tick.
pub trait IntentSource {
    fn intent_at(&self, tick: u64, time: f64) -> Result<FingerIntent>;
}

/// Piecewise-linear finger trajectory; holds the last breakpoint forever.
#[derive(Debug, Clone, PartialEq)]
pub struct GestureScript {
    breakpoints: Vec<Breakpoint>,
}

impl GestureScript {
    pub fn new(breakpoints: Vec<Breakpoint>, max_gap: f64) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(contract("empty gesture script"));
        }
        for (i, b) in breakpoints.iter().enumerate() {
            check_breakpoint(b, max_gap).map_err(|reason| Error::Parse { line: i + 1, reason })?;
        }
        if breakpoints[0].time != 0.0 {
            return Err(contract("gesture must start at t = 0"));
        }
        if let Some(i) = (1..breakpoints.len()).find(|&i| breakpoints[i].time <= breakpoints[i - 1].time) {
            return Err(contract(format!("non-ascending time at breakpoint {}", i + 1)));
        }
        Ok(Self { breakpoints })
    }

    /// Whitespace-separated `time gap rigidity` lines; `#` starts a comment.
    pub fn parse(text: &str, max_gap: f64) -> Result<Self> {
        let mut breakpoints: Vec<Breakpoint> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| Error::Parse { line: line_no, reason };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(err(format!("expected 3 fields, got {}", fields.len())));
            }
            let mut v = [0.0; 3];
            for (slot, f) in v.iter_mut().zip(&fields) {
                *slot = f.parse().map_err(|_| err(format!("not a number: {f:?}")))?;
            }
            let b = Breakpoint { time: v[0], target_gap: v[1], rigidity_intent: v[2] };
            check_breakpoint(&b, max_gap).map_err(err)?;
            match breakpoints.last() {
                None if b.time != 0.0 => return Err(err("first breakpoint must be at t = 0".into())),
                Some(prev) if b.time <= prev.time => {
                    return Err(err(format!("non-ascending time {} after {}", b.time, prev.time)))
                }
                _ => {}
            }
            breakpoints.push(b);
        }
        if breakpoints.is_empty() {
            return Err(Error::Parse { line: text.lines().count(), reason: "empty script".into() });
        }
        Ok(Self { breakpoints })
    }

    pub fn constant(target_gap: f64, rigidity_intent: f64, duration: f64, max_gap: f64) -> Result<Self> {
        let b = |time| Breakpoint { time, target_gap, rigidity_intent };
        if duration > 0.0 {
            Self::new(vec![b(0.0), b(duration)], max_gap)
        } else {
            Self::new(vec![b(0.0)], max_gap)
        }
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breakpoints
    }

    pub fn duration(&self) -> f64 {
        self.breakpoints.last().map_or(0.0, |b| b.time)
    }

    pub fn sample(&self, time: f64) -> (f64, f64) {
        let bp = &self.breakpoints;
        let i = bp.partition_point(|b| b.time <= time);
        if i == 0 {
            return (bp[0].target_gap, bp[0].rigidity_intent);
        }
        if i == bp.len() {
            let b = bp[i - 1];
            return (b.target_gap, b.rigidity_intent);
        }
        let (a, b) = (bp[i - 1], bp[i]);
        let u = (time - a.time) / (b.time - a.time);
        (
            a.target_gap + u * (b.target_gap - a.target_gap),
            a.rigidity_intent + u * (b.rigidity_intent - a.rigidity_intent),
        )
    }

    pub fn to_text(&self) -> String {
        self.breakpoints.iter().map(|b| format!("{} {} {}\n", b.time, b.target_gap, b.rigidity_intent)).collect()
    }
}

impl IntentSource for GestureScript {
    fn intent_at(&self, _tick: u64, time: f64) -> Result<FingerIntent> {
        let (target_gap, rigidity_intent) = self.sample(time);
        Ok(FingerIntent { target_gap, rigidity_intent })
    }
}

fn check_breakpoint(b: &Breakpoint, max_gap: f64) -> std::result::Result<(), String> {
    if !(b.time.is_finite() && b.time >= 0.0) {
        return Err(format!("time {} must be finite and >= 0", b.time));
    }
    if !(0.0..=max_gap).contains(&b.target_gap) {
        return Err(format!("gap {} mm outside [0, {max_gap}]", b.target_gap));
    }
    if !(0.0..=1.0).contains(&b.rigidity_intent) {
        return Err(format!("rigidity {} outside [0, 1]", b.rigidity_intent));
    }
    Ok(())
}

/// Intent changes keyed by sensor tick; piecewise constant.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntentTimeline {
    changes: Vec<(u64, FingerIntent)>,
}

impl IntentTimeline {
    pub fn new(initial: FingerIntent) -> Self {
        Self { changes: vec![(0, initial)] }
    }

    /// Records `intent` from `tick` on; repeated values are dropped.
    pub fn record(&mut self, tick: u64, intent: FingerIntent) -> Result<()> {
        match self.changes.last() {
            Some(&(t, _)) if tick < t => return Err(contract(format!("timeline tick {tick} precedes {t}"))),
            Some(&(_, prev)) if prev == intent => return Ok(()),
            Some(&(t, _)) if t == tick => {
                self.changes.pop();
            }
            _ => {}
        }
        self.changes.push((tick, intent));
        Ok(())
    }

    pub fn changes(&self) -> &[(u64, FingerIntent)] {
        &self.changes
    }
}

impl IntentSource for IntentTimeline {
    fn intent_at(&self, tick: u64, _time: f64) -> Result<FingerIntent> {
        let i = self.changes.partition_point(|&(t, _)| t <= tick);
        if i == 0 {
            return Err(contract(format!("no intent recorded at or before tick {tick}")));
        }
        Ok(self.changes[i - 1].1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_two_point_ramp() {
        let g = GestureScript::parse("0 10 0.2\n6 6 0.2", 17.0).unwrap();
        assert_eq!(g.breakpoints().len(), 2);
        assert_eq!(g.duration(), 6.0);
        assert_eq!(g.sample(3.0), (8.0, 0.2));
        assert_eq!(g.sample(10.0), (6.0, 0.2));
    }

    #[test]
    fn comment_only_is_empty() {
        let e = GestureScript::parse("# comment", 17.0).unwrap_err();
        assert!(e.to_string().contains("empty script"), "{e}");
    }

    #[test]
    fn non_ascending_reports_line() {
        match GestureScript::parse("0 10 0.2\n0 8 0.3", 17.0) {
            Err(Error::Parse { line: 2, reason }) => assert!(reason.contains("non-ascending")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_lines_rejected() {
        for (text, line) in
            [("0 10", 1), ("0 10 0.2\n1 x 0.2", 2), ("0 18 0.2", 1), ("# c\n0 10 1.5", 2), ("1 10 0.5", 1)]
        {
            match GestureScript::parse(text, 17.0) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn round_trips_through_text() {
        let g = GestureScript::parse("# x\n0 14 0.1\n2.1 11.2 0.1\n2.5 10.67 0.9\n6 6 0.1\n", 17.0).unwrap();
        assert_eq!(GestureScript::parse(&g.to_text(), 17.0).unwrap(), g);
    }

    #[test]
    fn timeline_is_piecewise_constant() {
        let i = |g| FingerIntent { target_gap: g, rigidity_intent: 0.5 };
        let mut tl = IntentTimeline::new(i(8.0));
        tl.record(10, i(9.0)).unwrap();
        tl.record(10, i(9.5)).unwrap();
        tl.record(12, i(9.5)).unwrap();
        tl.record(20, i(4.0)).unwrap();
        assert!(tl.record(5, i(1.0)).is_err());
        assert_eq!(tl.changes().len(), 3);
        assert_eq!(tl.intent_at(9, 0.0).unwrap(), i(8.0));
        assert_eq!(tl.intent_at(10, 0.0).unwrap(), i(9.5));
        assert_eq!(tl.intent_at(19, 0.0).unwrap(), i(9.5));
        assert_eq!(tl.intent_at(1000, 0.0).unwrap(), i(4.0));
    }
}
