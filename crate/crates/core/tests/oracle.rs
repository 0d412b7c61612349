//! Exhaustive search over small instances as an oracle for the swarm.

use uavsched_core::datagen::{generate_instance, GenSpec};
use uavsched_core::eat::build_schedule;
use uavsched_core::pso::{run_pso, PsoConfig};
use uavsched_core::{sample, ProblemInstance, Seconds, TaskId, Uav};

fn orderings(inst: &ProblemInstance) -> Vec<Vec<TaskId>> {
    fn rec(inst: &ProblemInstance, seq: &mut Vec<TaskId>, out: &mut Vec<Vec<TaskId>>) {
        if seq.len() == inst.tasks().len() {
            out.push(seq.clone());
            return;
        }
        for t in inst.tasks() {
            if !seq.contains(&t.id) && t.predecessors.iter().all(|p| seq.contains(p)) {
                seq.push(t.id);
                rec(inst, seq, out);
                seq.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(inst, &mut Vec::new(), &mut out);
    out
}

fn optimum(inst: &ProblemInstance) -> Seconds {
    orderings(inst).iter().map(|s| build_schedule(s, inst).unwrap().makespan()).min().unwrap()
}

#[test]
fn swarm_finds_six_task_optimum() {
    let map = sample::lab_map();
    let stations = sample::default_stations(&map);
    let uavs = vec![Uav::new("UAV1", stations[0].pos), Uav::new("UAV2", stations[1].pos)];
    for seed in 0..5 {
        let inst =
            generate_instance(&GenSpec { n_tasks: 6, seed, ..GenSpec::default() }, map.clone(), uavs.clone(), stations.clone())
                .unwrap();
        let best = run_pso(&inst, &PsoConfig { seed, ..PsoConfig::default() }).unwrap().best_makespan;
        assert_eq!(best, optimum(&inst), "instance seed {seed}");
    }
}

#[test]
fn twelve_task_example_enumerates() {
    let inst = sample::twelve_task_instance();
    let all = orderings(&inst);
    assert_eq!(all.len(), 21_054);
    let best = all.iter().map(|s| build_schedule(s, &inst).unwrap().makespan()).min().unwrap();
    assert_eq!(best, 6554);
    let found = run_pso(&inst, &PsoConfig::default()).unwrap().best_makespan;
    assert!(found >= best);
}
