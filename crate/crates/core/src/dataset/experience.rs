use super::{DatasetError, ProblemRecord};
use crate::deduction::Environment;
use crate::policy::{featurize_with_legal, Experience};

/// Replays each annotated sequence, recording the state features before
/// every step and `G_t = gamma^(T-1-t)`. Records without a sequence are
/// skipped; output is in (id, t) order.
pub fn build_experience(env: &Environment, corpus: &[ProblemRecord], gamma: f64) -> Result<Vec<Experience>, DatasetError> {
    let mut records: Vec<&ProblemRecord> = corpus.iter().filter(|r| r.annotated_sequence.is_some()).collect();
    records.sort_by(|a, b| a.id.cmp(&b.id));
    let mut pool = Vec::new();
    for r in records {
        let seq = r.annotated_sequence.as_deref().unwrap_or_default();
        let replay = |msg: String| DatasetError::Replay { id: r.id.clone(), message: msg };
        let mut state = env.init_state(&r.problem).map_err(|e| replay(e.to_string()))?.untraced();
        let mut legal = env.legal_actions(&state);
        let t_max = seq.len();
        for (t, &a) in seq.iter().enumerate() {
            let features = featurize_with_legal(env.schemas(), &state, &legal);
            let out = env.step(&state, a);
            if let Some(e) = out.error {
                return Err(replay(format!("step {t}: {e}")));
            }
            if !out.progress() {
                return Err(replay(format!("step {t} made no progress")));
            }
            pool.push(Experience {
                problem_id: r.id.clone(),
                t,
                features,
                action_index: env.schemas().action_index(a).expect("resolved action"),
                g: gamma.powi((t_max - 1 - t) as i32),
            });
            state = out.next;
            legal = if out.terminal { env.legal_actions(&state) } else { out.legal };
        }
    }
    Ok(pool)
}
