//! Prompt builders against reviewed golden files. Set `UPDATE_GOLDEN=1` to
//! rewrite the files after an intended wording change.

use std::path::PathBuf;

use agec_core::llm::{
    alc_taxonomy, build_corruptor_prompt, build_cot_prompt, build_expert_prompt, parse_model_output, presets,
    PromptTemplate, Shot, Stage, Strategy,
};
use agec_core::text::tokenize;

fn shots(n: usize) -> Vec<Shot> {
    let pairs = [
        ("الرجل يرب الفرس .", "الرجل يركب الفرس ."),
        ("غداالرجل سيركب الفرس .", "غدا الرجل سيركب الفرس ."),
        ("الرجل ، يركب الفرس .", "الرجل يركب الفرس ."),
        ("غدا الرجل ير كب الفرس .", "غدا الرجل يركب الفرس ."),
        ("وجد رجلا يركب فرس .", "وجد رجلا يركب فرسا ."),
    ];
    pairs[..n]
        .iter()
        .map(|(s, t)| Shot {
            source: tokenize(s),
            target: tokenize(t),
        })
        .collect()
}

fn assert_golden(name: &str, actual: &str) {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name].iter().collect();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "prompt differs from {}", path.display());
}

const INPUT: &str = "الرجل يجلس في ظهر الفرس .";

#[test]
fn cot_prompts_match_golden() {
    for n in [0, 3] {
        let t = PromptTemplate::new(Strategy::FewShotCoT, shots(n), None, Stage::AnswerExtraction).unwrap();
        assert_golden(&format!("cot_{n}shot.txt"), &build_cot_prompt(&t, &tokenize(INPUT)).unwrap());
    }
    let t = PromptTemplate::new(Strategy::FewShotCoT, shots(1), None, Stage::ReasoningExtraction).unwrap();
    assert_golden("cot_1shot_reasoning.txt", &build_cot_prompt(&t, &tokenize(INPUT)).unwrap());
}

#[test]
fn expert_prompt_matches_golden() {
    let t = PromptTemplate::new(Strategy::Expert, shots(5), Some(alc_taxonomy()), Stage::AnswerExtraction).unwrap();
    let p = build_expert_prompt(&t, &tokenize(INPUT)).unwrap();
    for e in alc_taxonomy() {
        assert!(p.contains(&format!("{}: {}", e.code, e.description)));
    }
    assert_golden("expert_5shot.txt", &p);
}

#[test]
fn corruptor_prompt_matches_golden() {
    let p = build_corruptor_prompt(&tokenize("الرجل يركب الفرس ."), &alc_taxonomy());
    assert!(p.contains("Arabic Learner Corpus"));
    assert_golden("corruptor.txt", &p);
}

#[test]
fn instruction_record_matches_golden() {
    let text = presets::instruction_text(presets::INSTRUCTION_PRESETS[7], INPUT, Some("الرجل يجلس على ظهر الفرس ."));
    assert_golden("instruction_preset7.txt", &text);
}

#[test]
fn builders_are_deterministic_and_invertible() {
    let t = PromptTemplate::new(Strategy::Expert, shots(1), Some(alc_taxonomy()), Stage::AnswerExtraction).unwrap();
    let x = tokenize(INPUT);
    assert_eq!(build_expert_prompt(&t, &x).unwrap(), build_expert_prompt(&t, &x).unwrap());
    // A reply that echoes the prompt's last example still yields its output span.
    let reply = format!("{}\n<output> {INPUT} </output>", "Reasoning: nothing to change.");
    assert!(parse_model_output(&reply).unwrap().sentence.same_tokens(&x));
}
