//! One participant's game: a target program and two anonymized robots, one
//! the literal listener and one the ranked listener.

use pragrank_core::eval::TraceTag;
use pragrank_core::ranking::rank_filtered;
use pragrank_core::{BitSet, GlobalRanking};
use serde::Serialize;

use crate::bundle::{Bundle, ExampleError};

pub const ROBOT_LABELS: [&str; 2] = ["green", "blue"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RobotStatus {
    Active,
    Solved,
    GivenUp,
}

impl RobotStatus {
    pub fn name(self) -> &'static str {
        match self {
            RobotStatus::Active => "active",
            RobotStatus::Solved => "solved",
            RobotStatus::GivenUp => "given_up",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ListenerKind {
    Literal,
    Ranked,
}

impl ListenerKind {
    pub fn name(self) -> &'static str {
        match self {
            ListenerKind::Literal => "L0",
            ListenerKind::Ranked => "L_sigma",
        }
    }

    /// Tag under which this robot's examples are logged as replay traces.
    pub fn trace_tag(self) -> TraceTag {
        match self {
            ListenerKind::Literal => TraceTag::H0,
            ListenerKind::Ranked => TraceTag::H1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Robot {
    pub label: &'static str,
    pub listener: ListenerKind,
    pub history: Vec<String>,
    pub status: RobotStatus,
    pub guess: Option<usize>,
    consistent: BitSet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TurnEvent {
    pub robot: &'static str,
    pub utterance: String,
    pub guess_id: String,
    pub solved: bool,
    pub at_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SessionError {
    UnknownRobot(String),
    Terminal { robot: &'static str, status: RobotStatus },
    Malformed(String),
    Inconsistent,
    InProgress,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuessPayload {
    pub robot: &'static str,
    pub turn: usize,
    pub guess: String,
    pub guess_id: String,
    pub solved: bool,
    pub status: RobotStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobotView {
    pub label: &'static str,
    pub status: RobotStatus,
    pub turn: usize,
    pub history: Vec<String>,
    pub guess: Option<String>,
    pub guess_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionView {
    pub session_id: String,
    pub domain: &'static str,
    pub target_id: String,
    pub target_rendered: String,
    pub robots: Vec<RobotView>,
    pub log: Vec<TurnEvent>,
}

#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub target: usize,
    pub robots: [Robot; 2],
    pub log: Vec<TurnEvent>,
}

impl Session {
    /// `green_literal` decides which label hides the literal listener.
    pub fn new(id: String, target: usize, programs: usize, green_literal: bool) -> Self {
        let kinds = if green_literal {
            [ListenerKind::Literal, ListenerKind::Ranked]
        } else {
            [ListenerKind::Ranked, ListenerKind::Literal]
        };
        let robot = |i: usize| Robot {
            label: ROBOT_LABELS[i],
            listener: kinds[i],
            history: Vec::new(),
            status: RobotStatus::Active,
            guess: None,
            consistent: BitSet::full(programs),
        };
        Self {
            id,
            target,
            robots: [robot(0), robot(1)],
            log: Vec::new(),
        }
    }

    fn robot_mut(&mut self, label: &str) -> Result<&mut Robot, SessionError> {
        self.robots
            .iter_mut()
            .find(|r| r.label == label)
            .ok_or_else(|| SessionError::UnknownRobot(label.into()))
    }

    /// Adds one example to a robot's history and returns its new top-1 guess.
    /// Nothing changes when the example is refused.
    pub fn submit(
        &mut self,
        bundle: &Bundle,
        literal: &GlobalRanking,
        label: &str,
        utterance: &str,
        at_ms: u64,
    ) -> Result<GuessPayload, SessionError> {
        let target = self.target;
        let robot = self.robot_mut(label)?;
        if robot.status != RobotStatus::Active {
            return Err(SessionError::Terminal {
                robot: robot.label,
                status: robot.status,
            });
        }
        let row = bundle.example_row(utterance).map_err(|ExampleError::Malformed(m)| SessionError::Malformed(m))?;
        if !row.contains(target) {
            return Err(SessionError::Inconsistent);
        }
        robot.consistent.intersect_with(&row);
        robot.history.push(bundle.canonical_example(utterance).expect("validated by example_row"));
        let ranking = match robot.listener {
            ListenerKind::Literal => literal,
            ListenerKind::Ranked => &bundle.sigma,
        };
        let (top, _) = rank_filtered(ranking, &robot.consistent, 1);
        let guess = top.first().expect("target stays consistent").hypothesis;
        robot.guess = Some(guess);
        let solved = guess == target;
        if solved {
            robot.status = RobotStatus::Solved;
        }
        let payload = GuessPayload {
            robot: robot.label,
            turn: robot.history.len(),
            guess: bundle.programs.render(guess),
            guess_id: bundle.programs.id(guess),
            solved,
            status: robot.status,
        };
        self.log.push(TurnEvent {
            robot: payload.robot,
            utterance: utterance.to_string(),
            guess_id: payload.guess_id.clone(),
            solved,
            at_ms,
        });
        Ok(payload)
    }

    pub fn give_up(&mut self, label: &str) -> Result<RobotStatus, SessionError> {
        let robot = self.robot_mut(label)?;
        if robot.status != RobotStatus::Active {
            return Err(SessionError::Terminal {
                robot: robot.label,
                status: robot.status,
            });
        }
        robot.status = RobotStatus::GivenUp;
        Ok(robot.status)
    }

    pub fn robot(&self, label: &str) -> Option<&Robot> {
        self.robots.iter().find(|r| r.label == label)
    }

    pub fn view(&self, bundle: &Bundle) -> SessionView {
        SessionView {
            session_id: self.id.clone(),
            domain: bundle.domain.name(),
            target_id: bundle.programs.id(self.target),
            target_rendered: bundle.programs.render(self.target),
            robots: self
                .robots
                .iter()
                .map(|r| RobotView {
                    label: r.label,
                    status: r.status,
                    turn: r.history.len(),
                    history: r.history.clone(),
                    guess: r.guess.map(|g| bundle.programs.render(g)),
                    guess_id: r.guess.map(|g| bundle.programs.id(g)),
                })
                .collect(),
            log: self.log.clone(),
        }
    }

    /// Label → listener name; only once both robots are finished.
    pub fn reveal(&self) -> Result<Vec<(&'static str, &'static str)>, SessionError> {
        if self.robots.iter().any(|r| r.status == RobotStatus::Active) {
            return Err(SessionError::InProgress);
        }
        Ok(self.robots.iter().map(|r| (r.label, r.listener.name())).collect())
    }

    /// The robot's examples as a replay-trace line, once it is finished.
    pub fn trace_line(&self, bundle: &Bundle, label: &str) -> Option<String> {
        let r = self.robot(label)?;
        if r.status == RobotStatus::Active || r.history.is_empty() {
            return None;
        }
        Some(format!(
            "{}\t{}\t{}",
            r.listener.trace_tag(),
            bundle.lexicon.hypothesis_id(self.target),
            r.history.join(";")
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::Domain;
    use pragrank_core::domains::regex::{regex_lexicon, Regex};

    fn bundle() -> Bundle {
        let programs: Vec<Regex> = ["0+1{1}", "0{2}1+", "0+1*", "0*1"].iter().map(|s| Regex::parse(s).unwrap()).collect();
        let strings: Vec<String> = ["01", "001", "0", "1", "0011"].iter().map(|s| s.to_string()).collect();
        let lex = regex_lexicon(&programs, &strings).unwrap();
        // prefer 0+1* over everything, then 0*1
        let sigma = GlobalRanking::from_scores(vec![1.0, 0.0, 3.0, 2.0]).unwrap();
        Bundle::new(Domain::RegexSmall, lex, sigma).unwrap()
    }

    #[test]
    fn robots_follow_their_rankings() {
        let b = bundle();
        let literal = GlobalRanking::from_scores(vec![0.25; 4]).unwrap();
        let mut s = Session::new("s".into(), 2, 4, true);
        // green is literal: ties by index give 0+1{1}
        let g = s.submit(&b, &literal, "green", "01", 5).unwrap();
        assert_eq!((g.guess_id.as_str(), g.solved, g.turn), ("0+1{1}", false, 1));
        let g = s.submit(&b, &literal, "blue", "01", 6).unwrap();
        assert_eq!((g.guess_id.as_str(), g.solved, g.status), ("0+1*", true, RobotStatus::Solved));
        assert_eq!(
            s.submit(&b, &literal, "blue", "0", 7),
            Err(SessionError::Terminal {
                robot: "blue",
                status: RobotStatus::Solved
            })
        );
        // "1" is matched by 0*1 only, so the target 0+1* refuses it
        assert_eq!(s.submit(&b, &literal, "green", "1", 8), Err(SessionError::Inconsistent));
        assert!(matches!(s.submit(&b, &literal, "green", "0a", 8), Err(SessionError::Malformed(_))));
        assert!(matches!(s.submit(&b, &literal, "red", "0", 8), Err(SessionError::UnknownRobot(_))));
        assert_eq!(s.robot("green").unwrap().history, vec!["01".to_string()]);
        assert_eq!(s.log.len(), 2);

        assert_eq!(s.reveal(), Err(SessionError::InProgress));
        // a string outside the sample still narrows the set
        let g = s.submit(&b, &literal, "green", "000", 9).unwrap();
        assert_eq!(g.guess_id, "0+1*");
        assert!(g.solved);
        assert_eq!(s.reveal().unwrap(), vec![("green", "L0"), ("blue", "L_sigma")]);
        assert_eq!(s.trace_line(&b, "green").unwrap(), "H0\t0+1*\t01;000");
        assert_eq!(s.trace_line(&b, "blue").unwrap(), "H1\t0+1*\t01");
    }

    #[test]
    fn give_up_is_terminal() {
        let b = bundle();
        let literal = GlobalRanking::from_scores(vec![0.25; 4]).unwrap();
        let mut s = Session::new("s".into(), 0, 4, false);
        assert_eq!(s.robots[0].listener, ListenerKind::Ranked);
        assert_eq!(s.give_up("green"), Ok(RobotStatus::GivenUp));
        assert!(matches!(s.give_up("green"), Err(SessionError::Terminal { .. })));
        assert!(matches!(s.submit(&b, &literal, "green", "01", 0), Err(SessionError::Terminal { .. })));
        assert!(s.trace_line(&b, "green").is_none());
        let view = s.view(&b);
        assert_eq!(view.target_id, "0+1{1}");
        assert_eq!(view.robots[0].status, RobotStatus::GivenUp);
        assert!(view.robots[1].guess.is_none());
    }
}
