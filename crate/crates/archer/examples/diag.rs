// Diagnostic: load probe checkpoint, inspect actor actions and critic values.
use archer::harness::load_checkpoint;
use archer::numcore::mlp_forward;

fn main() {
    let ck = load_checkpoint(std::path::Path::new("/tmp/probe/out/checkpoint_seed_1.bin")).unwrap();
    let agent = &ck.agent;
    // State at origin, zero velocity; goal at (0.8, 0.0).
    for goal in [[0.8, 0.0], [0.3, 0.0], [0.05, 0.0], [-0.5, 0.5]] {
        let state = [0.0, 0.0, 0.0, 0.0];
        let input: Vec<f64> = state.iter().chain(goal.iter()).cloned().collect();
        let (action, _) = mlp_forward(&agent.actor, &input).unwrap();
        println!("goal {goal:?}: action {action:?}");
        // Critic values for actions toward, away, zero
        for a in [[1.0, 0.0], [-1.0, 0.0], [0.0, 0.0]] {
            let ci: Vec<f64> = state.iter().chain(goal.iter()).chain(a.iter()).cloned().collect();
            let (q, _) = mlp_forward(&agent.critic, &ci).unwrap();
            println!("   Q(a={a:?}) = {:.4}", q[0]);
        }
    }
}
