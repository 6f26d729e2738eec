//! Arabic instruction presets and the instruction-tuning record layout.

use serde_json::json;

/// Eight correction instructions. Most exclude alif/ya or punctuation
/// errors, matching the normalized evaluation modes.
pub const INSTRUCTION_PRESETS: [&str; 8] = [
    "قم بتصحيح كل الأخطاء الكتابية في النص التالي ماعدا المتعلقة بالألف والياء وعلامات الترقيم:",
    "الرجاء التدقيق الإملائي والتدقيق النحوي و تصحيح كل الأخطاء في الجملة التالية إلا الخاصة بعلامات الترقيم:",
    "قم بإستكشاف أخطاء التدقيق الإملائي وإصلاحها ماعدا المتعلقة بعلامات الترقيم كالفاصلة  أو علامة إستفهام ، إلخ:",
    "هل يمكنك كل الأخطاء الموجودة في النص التالي ماعدا المتعلقة بعلامات الترقيم كالفاصلة ، النقطة ، إلخ :",
    "هل يمكنك إصلاح كل الأخطاء الإملائية والنحوية ماعدا الأخطاء الخاصة بالألف والياء:",
    "الرجاء إستكشاف أخطاء التدقيق الإملائي النحوي وإصلاحها كلها ماعدا الأخطاء المتعلقة بالألف والياء:",
    "قم بتصحيح كل الأخطاء الكتابية في النص التالي ماعدا المتعلقة بالألف والياء:",
    "الرجاء تصحيح كل الأخطاء الموجودة في الجملة التالية:",
];

const PREAMBLE: &str = "فيما يلي أمر توجيه يصف مهمة مرتبطة بمدخل لتزويد النص بسياق اضافي. يرجى صياغة ردود مناسبة لتحقق الطلب بطريقة مناسبة و دقيقة.";
const INSTRUCTION_HEADER: &str = "### الأمر/ التوجيه:";
const INPUT_HEADER: &str = "### المدخل:";
const RESPONSE_HEADER: &str = "### الرد:";

pub fn preset(index: usize) -> Option<&'static str> {
    INSTRUCTION_PRESETS.get(index).copied()
}

/// Instruction-tuning prompt text; the response section is left open when
/// `output` is `None`.
pub fn instruction_text(instruction: &str, input: &str, output: Option<&str>) -> String {
    format!(
        "{PREAMBLE}\n\n{INSTRUCTION_HEADER}\n{instruction}\n\n{INPUT_HEADER}\n{input}\n\n{RESPONSE_HEADER}\n{}",
        output.unwrap_or("")
    )
}

/// One JSON record in the common instruction/input/output layout.
pub fn instruction_record(instruction: &str, input: &str, output: &str) -> serde_json::Value {
    json!({ "instruction": instruction, "input": input, "output": output })
}
