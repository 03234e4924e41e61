#include "seqgen/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace seqgen::qpda {

CnfGrammar::CnfGrammar(std::vector<std::string> variables, std::vector<std::string> terminals, int start,
                       std::vector<Rule> rules)
    : variables_(std::move(variables)), terminals_(std::move(terminals)), start_(start), rules_(std::move(rules)) {}

std::vector<const Rule *> CnfGrammar::rules_for(int variable) const {
    std::vector<const Rule *> out;
    for (const auto &r : rules_) {
        if (r.lhs == variable) {
            out.push_back(&r);
        }
    }
    return out;
}

int CnfGrammar::variable_index(std::string_view name) const {
    const auto it = std::find(variables_.begin(), variables_.end(), name);
    return it == variables_.end() ? -1 : static_cast<int>(it - variables_.begin());
}

int CnfGrammar::terminal_index(std::string_view name) const {
    const auto it = std::find(terminals_.begin(), terminals_.end(), name);
    return it == terminals_.end() ? -1 : static_cast<int>(it - terminals_.begin());
}

std::vector<GrammarIssue> CnfGrammar::issues() const {
    std::vector<GrammarIssue> out;
    const auto nv = static_cast<int>(variables_.size());
    const auto nt = static_cast<int>(terminals_.size());
    if (start_ < 0 || start_ >= nv) {
        out.push_back({0, ErrorCode::CnfViolation, "start symbol is not a variable with rules"});
        return out;
    }
    std::vector<double> sums(variables_.size(), 0.0);
    std::vector<int> counts(variables_.size(), 0);
    for (const auto &r : rules_) {
        if (r.lhs < 0 || r.lhs >= nv) {
            out.push_back({0, ErrorCode::CnfViolation, "rule with an unknown left side"});
            continue;
        }
        if (r.binary()) {
            if (r.left < 0 || r.left >= nv || r.right < 0 || r.right >= nv) {
                out.push_back({0, ErrorCode::CnfViolation, "binary rule with an unknown variable"});
                continue;
            }
            if (r.left == start_ || r.right == start_) {
                out.push_back({0, ErrorCode::CnfViolation,
                               "start symbol " + variables_[static_cast<std::size_t>(start_)] +
                                   " appears on a right-hand side of " + variables_[static_cast<std::size_t>(r.lhs)]});
            }
        } else if (r.terminal >= nt) {
            out.push_back({0, ErrorCode::CnfViolation, "terminal rule with an unknown terminal"});
            continue;
        }
        if (!(r.weight > 0.0) || !std::isfinite(r.weight)) {
            out.push_back({0, ErrorCode::WeightNormalization,
                           "rule of " + variables_[static_cast<std::size_t>(r.lhs)] + " has a non-positive weight"});
        }
        sums[static_cast<std::size_t>(r.lhs)] += r.weight;
        ++counts[static_cast<std::size_t>(r.lhs)];
    }
    for (std::size_t v = 0; v < variables_.size(); ++v) {
        if (counts[v] == 0) {
            out.push_back({0, ErrorCode::CnfViolation, "variable " + variables_[v] + " has no rules"});
        } else if (std::abs(sums[v] - 1.0) > 1e-12) {
            std::ostringstream os;
            os.precision(17);
            os << "weights of " << variables_[v] << " sum to " << sums[v] << ", not 1";
            out.push_back({0, ErrorCode::WeightNormalization, os.str()});
        }
    }
    return out;
}

namespace {

std::string join_issues(const std::vector<GrammarIssue> &issues) {
    std::string msg;
    for (const auto &i : issues) {
        if (!msg.empty()) {
            msg += "; ";
        }
        if (i.line > 0) {
            msg += "line " + std::to_string(i.line) + ": ";
        }
        msg += i.message;
    }
    return msg;
}

} // namespace

void CnfGrammar::validate() const {
    const auto found = issues();
    if (!found.empty()) {
        fail(found.front().code, join_issues(found));
    }
}

bool CnfGrammar::single_char_terminals() const {
    return std::all_of(terminals_.begin(), terminals_.end(), [](const std::string &t) { return t.size() == 1; });
}

std::vector<int> CnfGrammar::tokenize(std::string_view text) const {
    std::vector<int> out;
    auto add = [&](std::string_view tok) {
        const int t = terminal_index(tok);
        require(t >= 0, ErrorCode::UnknownTerminal, "unknown terminal '" + std::string(tok) + "'");
        out.push_back(t);
    };
    if (single_char_terminals()) {
        for (const char c : text) {
            if (!std::isspace(static_cast<unsigned char>(c))) {
                add(std::string_view(&c, 1));
            }
        }
        return out;
    }
    std::istringstream is{std::string(text)};
    std::string tok;
    while (is >> tok) {
        add(tok);
    }
    return out;
}

std::string CnfGrammar::render(const std::vector<int> &word) const {
    const bool compact = single_char_terminals();
    std::string out;
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (!compact && i > 0) {
            out += ' ';
        }
        out += terminals_.at(static_cast<std::size_t>(word[i]));
    }
    return out;
}

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) {
        ++a;
    }
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) {
        --b;
    }
    return std::string(s.substr(a, b - a));
}

bool is_identifier(const std::string &s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) {
        return false;
    }
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::optional<double> parse_weight(const std::string &text) {
    const auto slash = text.find('/');
    try {
        std::size_t used = 0;
        if (slash != std::string::npos) {
            const std::string num = trim(text.substr(0, slash));
            const std::string den = trim(text.substr(slash + 1));
            const double p = std::stod(num, &used);
            if (used != num.size()) {
                return std::nullopt;
            }
            const double q = std::stod(den, &used);
            if (used != den.size() || q == 0.0) {
                return std::nullopt;
            }
            return p / q;
        }
        const double w = std::stod(text, &used);
        if (used != text.size()) {
            return std::nullopt;
        }
        return w;
    } catch (const std::exception &) {
        return std::nullopt;
    }
}

struct RawRule {
    std::size_t line;
    std::string lhs;
    std::vector<std::string> rhs; // quoted tokens keep their quotes
    double weight;
};

} // namespace

GrammarParse check_grammar(std::string_view text) {
    GrammarParse result;
    std::vector<RawRule> raw;
    std::string start_name;
    std::size_t start_line = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // Strip comments outside quotes.
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '\'') {
                quoted = !quoted;
            } else if (line[i] == '#' && !quoted) {
                line.resize(i);
                break;
            }
        }
        const std::string body = trim(line);
        if (body.empty()) {
            continue;
        }
        if (body.rfind("start:", 0) == 0) {
            start_name = trim(std::string_view(body).substr(6));
            start_line = lineno;
            if (!is_identifier(start_name)) {
                result.issues.push_back({lineno, ErrorCode::GrammarSyntax, "start declaration needs a variable name"});
            }
            continue;
        }
        const auto arrow = body.find("->");
        if (arrow == std::string::npos) {
            result.issues.push_back({lineno, ErrorCode::GrammarSyntax, "expected 'A -> ... @ weight'"});
            continue;
        }
        const std::string lhs = trim(std::string_view(body).substr(0, arrow));
        std::string rest = body.substr(arrow + 2);
        const auto at = rest.rfind('@');
        if (at == std::string::npos) {
            result.issues.push_back({lineno, ErrorCode::GrammarSyntax, "missing '@ weight'"});
            continue;
        }
        const auto weight = parse_weight(trim(std::string_view(rest).substr(at + 1)));
        if (!weight) {
            result.issues.push_back({lineno, ErrorCode::GrammarSyntax, "unreadable weight"});
            continue;
        }
        if (!is_identifier(lhs)) {
            result.issues.push_back({lineno, ErrorCode::GrammarSyntax, "left side must be a single variable name"});
            continue;
        }
        std::vector<std::string> rhs;
        std::string tok;
        const std::string rhs_text = rest.substr(0, at);
        bool bad = false;
        for (std::size_t i = 0; i < rhs_text.size();) {
            const char c = rhs_text[i];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++i;
            } else if (c == '\'') {
                const auto close = rhs_text.find('\'', i + 1);
                if (close == std::string::npos || close == i + 1) {
                    bad = true;
                    break;
                }
                rhs.push_back(rhs_text.substr(i, close - i + 1));
                i = close + 1;
            } else {
                std::size_t j = i;
                while (j < rhs_text.size() && !std::isspace(static_cast<unsigned char>(rhs_text[j])) &&
                       rhs_text[j] != '\'') {
                    ++j;
                }
                rhs.push_back(rhs_text.substr(i, j - i));
                i = j;
            }
        }
        if (bad || rhs.empty()) {
            result.issues.push_back({lineno, ErrorCode::GrammarSyntax, "malformed right-hand side"});
            continue;
        }
        raw.push_back({lineno, lhs, std::move(rhs), *weight});
    }

    std::vector<std::string> variables;
    auto var_id = [&](const std::string &name) {
        const auto it = std::find(variables.begin(), variables.end(), name);
        if (it != variables.end()) {
            return static_cast<int>(it - variables.begin());
        }
        variables.push_back(name);
        return static_cast<int>(variables.size() - 1);
    };
    if (!start_name.empty()) {
        var_id(start_name);
    }
    for (const auto &r : raw) {
        var_id(r.lhs);
    }
    const std::size_t declared = variables.size();
    auto is_declared = [&](const std::string &name) {
        const auto it = std::find(variables.begin(), variables.begin() + static_cast<std::ptrdiff_t>(declared), name);
        return it != variables.begin() + static_cast<std::ptrdiff_t>(declared);
    };

    std::vector<std::string> terminals;
    auto term_id = [&](const std::string &name) {
        const auto it = std::find(terminals.begin(), terminals.end(), name);
        if (it != terminals.end()) {
            return static_cast<int>(it - terminals.begin());
        }
        terminals.push_back(name);
        return static_cast<int>(terminals.size() - 1);
    };

    std::vector<Rule> rules;
    for (const auto &r : raw) {
        Rule rule;
        rule.lhs = var_id(r.lhs);
        rule.weight = r.weight;
        if (r.rhs.size() == 1) {
            const std::string &t = r.rhs[0];
            if (t.front() == '\'') {
                rule.terminal = term_id(t.substr(1, t.size() - 2));
            } else if (is_declared(t)) {
                result.issues.push_back({r.line, ErrorCode::CnfViolation, "unit rule " + r.lhs + " -> " + t});
                continue;
            } else {
                rule.terminal = term_id(t);
            }
        } else if (r.rhs.size() == 2) {
            if (r.rhs[0].front() == '\'' || r.rhs[1].front() == '\'' || !is_identifier(r.rhs[0]) ||
                !is_identifier(r.rhs[1])) {
                result.issues.push_back(
                    {r.line, ErrorCode::CnfViolation, "binary rule of " + r.lhs + " must have two variables"});
                continue;
            }
            rule.left = var_id(r.rhs[0]);
            rule.right = var_id(r.rhs[1]);
        } else {
            result.issues.push_back({r.line, ErrorCode::CnfViolation,
                                     "rule of " + r.lhs + " has " + std::to_string(r.rhs.size()) +
                                         " symbols on the right; CNF allows 1 or 2"});
            continue;
        }
        rules.push_back(rule);
    }
    if (raw.empty() && start_name.empty()) {
        result.issues.push_back({0, ErrorCode::GrammarSyntax, "grammar has no rules"});
        return result;
    }
    const int start = start_name.empty() ? 0 : var_id(start_name);
    (void)start_line;
    CnfGrammar g(std::move(variables), std::move(terminals), start, std::move(rules));
    // Attach line numbers to structural issues where the rule is identifiable.
    for (auto issue : g.issues()) {
        result.issues.push_back(std::move(issue));
    }
    if (result.issues.empty()) {
        result.grammar = std::move(g);
    }
    return result;
}

CnfGrammar parse_grammar(std::string_view text) {
    auto parsed = check_grammar(text);
    if (!parsed.issues.empty()) {
        fail(parsed.issues.front().code, join_issues(parsed.issues));
    }
    return std::move(*parsed.grammar);
}

CnfGrammar load_grammar(const std::string &path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::InvalidArgument, "cannot open grammar file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_grammar(buf.str());
}

namespace {

double cyk(const CnfGrammar &g, const std::vector<int> &word, bool amplitude) {
    g.validate();
    const std::size_t n = word.size();
    const std::size_t nv = g.variables().size();
    for (const int t : word) {
        require(t >= 0 && static_cast<std::size_t>(t) < g.terminals().size(), ErrorCode::UnknownTerminal,
                "word contains an unknown terminal");
    }
    if (n == 0) {
        return 0.0;
    }
    auto w = [&](const Rule &r) { return amplitude ? std::sqrt(r.weight) : r.weight; };
    // table[i][len-1][A]: weight of A deriving word[i, i+len).
    std::vector<std::vector<std::vector<double>>> table(
        n, std::vector<std::vector<double>>(n, std::vector<double>(nv, 0.0)));
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto &r : g.rules()) {
            if (!r.binary() && r.terminal == word[i]) {
                table[i][0][static_cast<std::size_t>(r.lhs)] += w(r);
            }
        }
    }
    for (std::size_t len = 2; len <= n; ++len) {
        for (std::size_t i = 0; i + len <= n; ++i) {
            auto &cell = table[i][len - 1];
            for (std::size_t split = 1; split < len; ++split) {
                const auto &a = table[i][split - 1];
                const auto &b = table[i + split][len - split - 1];
                for (const auto &r : g.rules()) {
                    if (r.binary()) {
                        const double x = a[static_cast<std::size_t>(r.left)] * b[static_cast<std::size_t>(r.right)];
                        if (x != 0.0) {
                            cell[static_cast<std::size_t>(r.lhs)] += w(r) * x;
                        }
                    }
                }
            }
        }
    }
    return table[0][n - 1][static_cast<std::size_t>(g.start())];
}

} // namespace

double recognize(const CnfGrammar &grammar, const std::vector<int> &word) {
    return cyk(grammar, word, false);
}

double recognize(const CnfGrammar &grammar, std::string_view text) {
    return recognize(grammar, grammar.tokenize(text));
}

double coherent_amplitude(const CnfGrammar &grammar, const std::vector<int> &word) {
    return cyk(grammar, word, true);
}

} // namespace seqgen::qpda
