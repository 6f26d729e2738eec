//! Deterministic toy corpus of well-formed Arabic sentences, for tests,
//! benchmarks and demos. The vocabulary covers every orthographic pattern the
//! default confusion tables act on (hamza seats, ta marbuta, final ya and
//! alif maqsura, plural waw, tanwin).

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::text::{tokenize, Sentence};

const VOCAB: &[&str] = &[
    "أحمد", "إبراهيم", "أن", "إن", "إلى", "أيضا", "أكثر", "الأمر", "الإسلامي", "آخر", "مسؤول", "سؤال", "رئيس",
    "بيئة", "قرأ", "سأل", "المدرسة", "الجامعة", "الحالة", "مدينة", "الحكومة", "سياسة", "الدولة", "فكرة",
    "رسالة", "على", "حتى", "مستشفى", "موسى", "مصطفى", "الذي", "التي", "في", "كتبوا", "ذهبوا", "قالوا",
    "درسوا", "يدعو", "كتاباً", "جميلاً", "شكراً", "رجلٌ", "بيتٍ", "الرجل", "يركب", "الفرس", "غدا",
    "العرب", "نعرف", "الشماتة", "يجب", "ندرس", "هذه", "المخرج", "منها", "من", "الاقتصاد", "الطلاب",
    "السبورة", "كبيرة", "الكتاب", "العلم", "العمل", "الناس", "الوقت", "اليوم", "كان", "يكون", "لكن",
    "ولكن", "عندما", "بعد", "قبل", "كل", "بين", "مع", "عن", "لا", "لم", "قد", "ثم", "هو", "هي", "نحن",
    "الشعب", "المجتمع", "التعليم", "الطالب", "المعلم", "الصحيفة", "المقال", "الموضوع", "السوق",
    "الأسعار", "الشباب", "المستقبل", "الحرية", "التاريخ", "اللغة", "العربية", "يكتب", "يقرأ", "تعلم",
    "فهم", "وجد", "أراد", "استطاع", "بسبب", "خلال", "حول", "جديد", "كبير", "صغير", "مهم", "واضح",
];

const END_MARKS: &[(&str, u32)] = &[(".", 8), ("؟", 1), ("!", 1)];

/// Builds `count` sentences of 6 to 24 words from a fixed seed.
pub fn toy_corpus(seed: u64, count: usize) -> Vec<Sentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let words = rng.random_range(6..=24);
            let mut text = String::new();
            for w in 0..words {
                if w > 0 {
                    text.push(' ');
                }
                text.push_str(VOCAB.choose(&mut rng).expect("non-empty"));
                if w + 1 < words && rng.random_bool(0.12) {
                    text.push_str(" ،");
                }
            }
            let end = END_MARKS
                .choose_weighted(&mut rng, |m| m.1)
                .expect("positive weights")
                .0;
            text.push(' ');
            text.push_str(end);
            tokenize(&text).with_id(format!("s{i}"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_well_formed() {
        let a = toy_corpus(1, 50);
        assert_eq!(a, toy_corpus(1, 50));
        assert_ne!(a, toy_corpus(2, 50));
        for s in &a {
            assert!((7..=50).contains(&s.len()));
            assert!(s.tokens.last().unwrap().is_punct());
        }
    }
}
