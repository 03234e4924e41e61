#pragma once

#include "seqgen/errors.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace seqgen::qpda {

/// A -> B C (binary) or A -> 'a' (terminal), with a positive weight.
struct Rule {
    int lhs = -1;
    int left = -1;     // B, binary rules only
    int right = -1;    // C, binary rules only
    int terminal = -1; // terminal rules only
    double weight = 0.0;

    [[nodiscard]] bool binary() const { return terminal < 0; }
};

struct GrammarIssue {
    std::size_t line = 0; // 1-based, 0 for whole-grammar issues
    ErrorCode code = ErrorCode::GrammarSyntax;
    std::string message;
};

/// Weighted grammar in Chomsky normal form. Each variable's rule weights sum to 1.
class CnfGrammar {
  public:
    CnfGrammar() = default;
    CnfGrammar(std::vector<std::string> variables, std::vector<std::string> terminals, int start, std::vector<Rule> rules);

    [[nodiscard]] const std::vector<std::string> &variables() const { return variables_; }
    [[nodiscard]] const std::vector<std::string> &terminals() const { return terminals_; }
    [[nodiscard]] const std::vector<Rule> &rules() const { return rules_; }
    [[nodiscard]] int start() const { return start_; }
    /// Rules whose left side is `variable`.
    [[nodiscard]] std::vector<const Rule *> rules_for(int variable) const;

    [[nodiscard]] int variable_index(std::string_view name) const;
    [[nodiscard]] int terminal_index(std::string_view name) const;

    /// Every structural violation; empty for a valid grammar.
    [[nodiscard]] std::vector<GrammarIssue> issues() const;
    void validate() const;

    /// Splits text into terminal indices: one character per terminal when all
    /// terminals are single characters, whitespace separated otherwise.
    [[nodiscard]] std::vector<int> tokenize(std::string_view text) const;
    [[nodiscard]] std::string render(const std::vector<int> &word) const;
    [[nodiscard]] bool single_char_terminals() const;

  private:
    std::vector<std::string> variables_;
    std::vector<std::string> terminals_;
    int start_ = -1;
    std::vector<Rule> rules_;
};

struct GrammarParse {
    std::optional<CnfGrammar> grammar;
    std::vector<GrammarIssue> issues;
};

/// Reads the text format and reports every issue found.
GrammarParse check_grammar(std::string_view text);
/// Throws the first issue's error code with all issues in the message.
CnfGrammar parse_grammar(std::string_view text);
CnfGrammar load_grammar(const std::string &path);

/// Sum over derivations of the product of rule weights (CYK).
double recognize(const CnfGrammar &grammar, const std::vector<int> &word);
double recognize(const CnfGrammar &grammar, std::string_view text);

/// Sum over derivations of the product of square-rooted rule weights.
double coherent_amplitude(const CnfGrammar &grammar, const std::vector<int> &word);

} // namespace seqgen::qpda
