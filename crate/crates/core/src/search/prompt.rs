use std::fmt::Write as _;

use super::database::ProgramDatabase;
use crate::lang::{Feature, SEED_PROGRAM};
use crate::report::InstanceSummary;
use crate::sampler::{Prompt, PROGRAM_CLOSE, PROGRAM_OPEN};

const GRAMMAR: &str = "\
expr  := cmp
cmp   := sum ((\"<\" | \"<=\" | \">\" | \">=\" | \"==\") sum)?
sum   := prod ((\"+\" | \"-\") prod)*
prod  := unary ((\"*\" | \"/\") unary)*
unary := \"-\" unary | atom
atom  := NUMBER | FEATURE | FUNC \"(\" expr (\",\" expr)* \")\" | \"(\" expr \")\"";

/// Assembles the sampler prompt for one island: instance summary, language
/// reference, the island's `k` best programs shown worst to best, and the
/// request. An empty island shows the seed program instead.
pub fn build_prompt(
    db: &ProgramDatabase,
    summary: &InstanceSummary,
    island: usize,
    k: usize,
) -> Prompt {
    let mut text = String::new();
    let _ = writeln!(
        text,
        "Task: write a priority rule that schedules generating units for the unit commitment problem."
    );
    let _ = writeln!(
        text,
        "Instance: N={} units, T={} periods, demand {:.1}-{:.1} MW, total capacity {:.1} MW.",
        summary.units,
        summary.periods,
        summary.demand_min,
        summary.demand_max,
        summary.total_capacity
    );
    text.push_str(
        "\nHow the rule is used: in each period, units still inside their minimum up or down \
time keep their state. Every other unit gets the rule's value; units are switched on from \
the highest value down until committed capacity covers demand. Output is then dispatched \
cheapest first. Score = operating cost + 10000 per MW of unmet demand + 100000 per period of \
minimum up/down violation. Lower is better.\n",
    );
    let _ = writeln!(text, "\nLanguage grammar:\n{GRAMMAR}");
    text.push_str(
        "Functions: min(a, b), max(a, b), abs(a), if(cond, a, b). Comparisons return 1 or 0.\n",
    );
    text.push_str("Features:\n");
    for f in Feature::ALL {
        let _ = writeln!(text, "  {:<16} {}", f.name(), f.description());
    }

    let examples = db.top_k(island, k);
    let parents: Vec<String> = if examples.is_empty() {
        let _ = write!(
            text,
            "\nNo program has been scored yet. Starting program:\n{PROGRAM_OPEN}{SEED_PROGRAM}{PROGRAM_CLOSE}\n"
        );
        vec![SEED_PROGRAM.to_string()]
    } else {
        text.push_str("\nPrevious programs, worst to best:\n");
        for (n, rec) in examples.iter().enumerate() {
            let _ = writeln!(
                text,
                "# program {} (score {:.2})\n{PROGRAM_OPEN}{}{PROGRAM_CLOSE}",
                n + 1,
                rec.score,
                rec.source
            );
        }
        examples.iter().map(|r| r.source.clone()).collect()
    };
    let _ = write!(
        text,
        "\nWrite one new program that scores lower than all of the above. \
Reply with the program only, enclosed in {PROGRAM_OPEN} and {PROGRAM_CLOSE}."
    );
    Prompt { text, parents }
}
