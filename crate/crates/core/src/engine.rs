//! The online process: jobs arrive one at a time, an arrival rule decides,
//! and the engine checks and applies the decision.

use crate::algorithms::AlgorithmSpec;
use crate::error::{Error, Result};
use crate::model::{
    apply_outcome, validate_with, ArrivalOutcome, Assignment, Instance, InstanceKind, Job, JobId, RunLog,
    ValidateOptions,
};

/// Anything that can decide arrivals. Implemented by [`AlgorithmSpec`];
/// adversaries accept any implementation.
pub trait ArrivalRule {
    fn label(&self) -> String;

    /// Decides the arrival of `jobs[arriving]` given the assignment of all
    /// earlier jobs.
    fn decide(&self, assignment: &Assignment, jobs: &[Job], arriving: JobId) -> ArrivalOutcome;
}

impl ArrivalRule for AlgorithmSpec {
    fn label(&self) -> String {
        self.to_string()
    }

    fn decide(&self, assignment: &Assignment, jobs: &[Job], arriving: JobId) -> ArrivalOutcome {
        AlgorithmSpec::decide(self, assignment, jobs, arriving)
    }
}

/// An online run in progress. Jobs are pushed one by one; each push is
/// validated against the jobs so far and decided immediately.
pub struct Session<'r, R: ArrivalRule + ?Sized> {
    rule: &'r R,
    kind: InstanceKind,
    jobs: Vec<Job>,
    assignment: Assignment,
    outcomes: Vec<ArrivalOutcome>,
    options: ValidateOptions,
}

impl<'r, R: ArrivalRule + ?Sized> Session<'r, R> {
    pub fn new(rule: &'r R, kind: InstanceKind) -> Self {
        Session {
            rule,
            kind,
            jobs: Vec::new(),
            assignment: Assignment::new(),
            outcomes: Vec::new(),
            options: ValidateOptions::default(),
        }
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn outcomes(&self) -> &[ArrivalOutcome] {
        &self.outcomes
    }

    /// Feeds the next job; its id is overwritten with its position.
    pub fn push(&mut self, mut job: Job) -> Result<&ArrivalOutcome> {
        let id = JobId(self.jobs.len());
        job.id = id;
        self.jobs.push(job);
        let probe = Instance { kind: self.kind, jobs: self.jobs[self.jobs.len().saturating_sub(2)..].to_vec() };
        if let Err(mut violations) = validate_with(&renumbered(probe), &self.options) {
            self.jobs.pop();
            for v in &mut violations {
                v.job = Some(id);
            }
            return Err(Error::InvalidInstance(violations));
        }
        let outcome = self.rule.decide(&self.assignment, &self.jobs, id);
        match apply_outcome(&self.assignment, &outcome, &self.jobs) {
            Ok(next) => {
                self.assignment = next;
                self.outcomes.push(outcome);
                Ok(self.outcomes.last().expect("just pushed"))
            }
            Err(e) => {
                self.jobs.pop();
                Err(e)
            }
        }
    }

    pub fn finish(self) -> RunLog {
        RunLog::new(self.rule.label(), self.outcomes, self.assignment)
    }

    pub fn into_parts(self) -> (Instance, RunLog) {
        let inst = Instance { kind: self.kind, jobs: self.jobs.clone() };
        (inst, RunLog::new(self.rule.label(), self.outcomes, self.assignment))
    }
}

fn renumbered(inst: Instance) -> Instance {
    Instance::new(inst.kind, inst.jobs)
}

/// Runs any arrival rule over a whole instance.
pub fn run_rule<R: ArrivalRule + ?Sized>(rule: &R, inst: &Instance) -> Result<RunLog> {
    validate_with(inst, &ValidateOptions::default()).map_err(Error::InvalidInstance)?;
    let mut session = Session::new(rule, inst.kind);
    for job in &inst.jobs {
        session.push(job.clone())?;
    }
    Ok(session.finish())
}

/// Runs `spec` over `inst`. Batched specs are dispatched to [`run_batched`].
pub fn run(spec: &AlgorithmSpec, inst: &Instance) -> Result<RunLog> {
    match spec {
        AlgorithmSpec::Batched(inner) => run_batched(inner, inst),
        _ => run_rule(spec, inst),
    }
}

/// Batching wrapper: jobs with equal arrival time form one batch, decided
/// together with the frozen boundary at the batch time. Members are fed to
/// the inner rule in list order and recorded individually.
pub fn run_batched(inner: &AlgorithmSpec, inst: &Instance) -> Result<RunLog> {
    if matches!(inner, AlgorithmSpec::Batched(_)) {
        return Err(Error::Parameter("batched algorithms cannot be nested".into()));
    }
    validate_with(inst, &ValidateOptions::default()).map_err(Error::InvalidInstance)?;
    let mut assignment = Assignment::new();
    let mut outcomes = Vec::with_capacity(inst.len());
    for batch in inst.jobs.chunk_by(|x, y| x.arrival == y.arrival) {
        for job in batch {
            let outcome = inner.decide(&assignment, &inst.jobs, job.id);
            assignment = apply_outcome(&assignment, &outcome, &inst.jobs)?;
            outcomes.push(outcome);
        }
    }
    Ok(RunLog::new(format!("batched:{inner}"), outcomes, assignment))
}
