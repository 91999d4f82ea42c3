#pragma once

// Typed STRIPS subset of PDDL: lifted model, parser, writer, on-demand
// grounding and successor generation.

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace symplan::pddl {

using ObjectId = std::uint32_t;
using TypeId = std::uint32_t;
using PredicateId = std::uint32_t;

inline constexpr std::string_view kUniversalType = "object";

enum class ErrorCode {
    syntax,
    unknown_type,
    unknown_predicate,
    unknown_object,
    unknown_variable,
    arity_mismatch,
    type_mismatch,
    unsupported_feature,
    duplicate_name,
    type_cycle,
    domain_mismatch,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::syntax: return "syntax";
        case ErrorCode::unknown_type: return "unknown-type";
        case ErrorCode::unknown_predicate: return "unknown-predicate";
        case ErrorCode::unknown_object: return "unknown-object";
        case ErrorCode::unknown_variable: return "unknown-variable";
        case ErrorCode::arity_mismatch: return "arity-mismatch";
        case ErrorCode::type_mismatch: return "type-mismatch";
        case ErrorCode::unsupported_feature: return "unsupported-feature";
        case ErrorCode::duplicate_name: return "duplicate-name";
        case ErrorCode::type_cycle: return "type-cycle";
        case ErrorCode::domain_mismatch: return "domain-mismatch";
    }
    return "unknown";
}

class ParseError : public std::runtime_error {
public:
    ParseError(ErrorCode code, const std::string& message, int line = 0, int column = 0)
        : std::runtime_error(format(code, message, line, column)),
          code_(code), line_(line), column_(column), detail_(message) {}

    ErrorCode code() const noexcept { return code_; }
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    static std::string format(ErrorCode code, const std::string& message, int line, int column) {
        std::ostringstream os;
        if (line > 0) os << "line " << line << ", column " << column << ": ";
        os << message << " [" << to_string(code) << "]";
        return os.str();
    }

    ErrorCode code_;
    int line_;
    int column_;
    std::string detail_;
};

struct TypeDef {
    std::string name;
    std::optional<TypeId> parent;
    friend bool operator==(const TypeDef&, const TypeDef&) = default;
};

struct PredicateDef {
    std::string name;
    std::vector<TypeId> param_types;
    std::size_t arity() const { return param_types.size(); }
    friend bool operator==(const PredicateDef&, const PredicateDef&) = default;
};

/// Argument of a lifted atom: a schema parameter or a domain constant.
struct Term {
    enum class Kind : std::uint8_t { parameter, constant };
    Kind kind = Kind::parameter;
    std::uint32_t index = 0;
    friend bool operator==(const Term&, const Term&) = default;
};

struct AtomSchema {
    PredicateId predicate = 0;
    std::vector<Term> args;
    friend bool operator==(const AtomSchema&, const AtomSchema&) = default;
};

struct ActionSchema {
    std::string name;
    std::vector<std::string> param_names;
    std::vector<TypeId> param_types;
    std::vector<AtomSchema> pre;
    std::vector<AtomSchema> add;
    std::vector<AtomSchema> del;
    std::size_t arity() const { return param_types.size(); }
    friend bool operator==(const ActionSchema&, const ActionSchema&) = default;
};

struct Constant {
    std::string name;
    TypeId type = 0;
    friend bool operator==(const Constant&, const Constant&) = default;
};

/// Types, predicates and schemas are stored sorted by name, so index order
/// equals name order. Type 0 is not necessarily `object`; use universal_type().
struct DomainModel {
    std::string name;
    std::vector<std::string> requirements;
    std::vector<TypeDef> types;
    std::vector<PredicateDef> predicates;
    std::vector<Constant> constants;
    std::vector<ActionSchema> schemas;

    friend bool operator==(const DomainModel&, const DomainModel&) = default;

    std::optional<TypeId> find_type(std::string_view n) const {
        auto it = std::lower_bound(types.begin(), types.end(), n,
                                   [](const TypeDef& t, std::string_view k) { return t.name < k; });
        if (it == types.end() || it->name != n) return std::nullopt;
        return static_cast<TypeId>(it - types.begin());
    }
    std::optional<PredicateId> find_predicate(std::string_view n) const {
        auto it = std::lower_bound(predicates.begin(), predicates.end(), n,
                                   [](const PredicateDef& p, std::string_view k) { return p.name < k; });
        if (it == predicates.end() || it->name != n) return std::nullopt;
        return static_cast<PredicateId>(it - predicates.begin());
    }
    TypeId universal_type() const { return *find_type(kUniversalType); }

    bool is_subtype(TypeId sub, TypeId super) const {
        std::optional<TypeId> t = sub;
        while (t) {
            if (*t == super) return true;
            t = types[*t].parent;
        }
        return false;
    }
};

struct Proposition {
    PredicateId predicate = 0;
    std::vector<ObjectId> args;

    // Canonical total order: predicate (name order), then args (name order).
    friend auto operator<=>(const Proposition&, const Proposition&) = default;
    friend bool operator==(const Proposition&, const Proposition&) = default;
};

struct PropositionHash {
    std::size_t operator()(const Proposition& p) const noexcept {
        std::size_t h = 0x9e3779b97f4a7c15ULL ^ p.predicate;
        for (ObjectId a : p.args) h = (h ^ a) * 0x100000001b3ULL + (h >> 29);
        return h;
    }
};

/// Set of true propositions kept sorted and duplicate-free.
class State {
public:
    State() = default;
    explicit State(std::vector<Proposition> props) : props_(std::move(props)) {
        std::sort(props_.begin(), props_.end());
        props_.erase(std::unique(props_.begin(), props_.end()), props_.end());
    }

    const std::vector<Proposition>& propositions() const noexcept { return props_; }
    std::size_t size() const noexcept { return props_.size(); }
    bool empty() const noexcept { return props_.empty(); }
    auto begin() const noexcept { return props_.begin(); }
    auto end() const noexcept { return props_.end(); }

    bool contains(const Proposition& p) const {
        return std::binary_search(props_.begin(), props_.end(), p);
    }
    template <typename Range>
    bool contains_all(const Range& range) const {
        for (const auto& p : range)
            if (!contains(p)) return false;
        return true;
    }

    friend bool operator==(const State&, const State&) = default;

private:
    std::vector<Proposition> props_;
};

struct StateHash {
    std::size_t operator()(const State& s) const noexcept {
        std::size_t h = 1469598103934665603ULL;
        PropositionHash ph;
        for (const auto& p : s) h = (h ^ ph(p)) * 1099511628211ULL;
        return h;
    }
};

struct Object {
    std::string name;
    TypeId type = 0;
    friend bool operator==(const Object&, const Object&) = default;
};

struct GroundAction {
    std::uint32_t schema = 0;
    std::vector<ObjectId> args;
    std::vector<Proposition> pre;
    std::vector<Proposition> add;
    std::vector<Proposition> del;

    friend bool operator==(const GroundAction& a, const GroundAction& b) {
        return a.schema == b.schema && a.args == b.args;
    }
};

/// Objects are sorted by name; ObjectId is the index in that order.
struct LiftedProblem {
    std::string name;
    std::shared_ptr<const DomainModel> domain;
    std::vector<Object> objects;
    State init;
    std::vector<Proposition> goal;            // sorted, unique
    std::vector<bool> static_predicate;       // indexed by PredicateId
    std::vector<Proposition> static_props;    // static propositions of init, sorted
    std::vector<ObjectId> constant_objects;   // domain constant index -> object

    const DomainModel& dom() const { return *domain; }

    std::optional<ObjectId> find_object(std::string_view n) const {
        auto it = std::lower_bound(objects.begin(), objects.end(), n,
                                   [](const Object& o, std::string_view k) { return o.name < k; });
        if (it == objects.end() || it->name != n) return std::nullopt;
        return static_cast<ObjectId>(it - objects.begin());
    }
    bool is_goal(const State& s) const { return s.contains_all(goal); }
};

// ---------------------------------------------------------------------------
// S-expression reader
// ---------------------------------------------------------------------------

namespace detail {

struct SExpr {
    bool is_list = false;
    std::string atom;
    std::vector<SExpr> items;
    int line = 0;
    int column = 0;

    bool is_atom(std::string_view s) const { return !is_list && atom == s; }
    bool head_is(std::string_view s) const {
        return is_list && !items.empty() && items.front().is_atom(s);
    }
};

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    SExpr read_document() {
        skip_space();
        if (pos_ >= text_.size()) throw ParseError(ErrorCode::syntax, "empty input", line_, col_);
        SExpr e = read();
        skip_space();
        if (pos_ < text_.size())
            throw ParseError(ErrorCode::syntax, "trailing content after definition", line_, col_);
        return e;
    }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    SExpr read() {
        skip_space();
        if (pos_ >= text_.size()) throw ParseError(ErrorCode::syntax, "unexpected end of input", line_, col_);
        SExpr e;
        e.line = line_;
        e.column = col_;
        char c = text_[pos_];
        if (c == '(') {
            e.is_list = true;
            advance();
            for (;;) {
                skip_space();
                if (pos_ >= text_.size())
                    throw ParseError(ErrorCode::syntax, "unbalanced parenthesis", e.line, e.column);
                if (text_[pos_] == ')') {
                    advance();
                    break;
                }
                e.items.push_back(read());
            }
            return e;
        }
        if (c == ')') throw ParseError(ErrorCode::syntax, "unexpected ')'", line_, col_);
        while (pos_ < text_.size()) {
            char d = text_[pos_];
            if (d == '(' || d == ')' || d == ';' || std::isspace(static_cast<unsigned char>(d))) break;
            e.atom.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(d))));
            advance();
        }
        return e;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

[[noreturn]] inline void fail(ErrorCode code, const SExpr& at, const std::string& msg) {
    throw ParseError(code, msg, at.line, at.column);
}

inline const std::string& expect_atom(const SExpr& e, std::string_view what) {
    if (e.is_list) fail(ErrorCode::syntax, e, "expected " + std::string(what));
    return e.atom;
}

struct TypedName {
    std::string name;
    std::string type;
    const SExpr* where;
};

// Parses `a b - t c - u d` into (name, type) pairs; untyped names get `object`.
inline std::vector<TypedName> parse_typed_list(const std::vector<SExpr>& items, std::size_t first) {
    std::vector<TypedName> out;
    std::vector<std::pair<std::string, const SExpr*>> pending;
    for (std::size_t i = first; i < items.size(); ++i) {
        const SExpr& it = items[i];
        if (it.is_atom("-")) {
            if (i + 1 >= items.size()) fail(ErrorCode::syntax, it, "missing type after '-'");
            const SExpr& t = items[i + 1];
            if (t.head_is("either")) fail(ErrorCode::unsupported_feature, t, "'either' types are not supported");
            const std::string& tn = expect_atom(t, "type name");
            if (pending.empty()) fail(ErrorCode::syntax, it, "type annotation without names");
            for (auto& [n, w] : pending) out.push_back({n, tn, w});
            pending.clear();
            ++i;
        } else {
            pending.emplace_back(expect_atom(it, "name"), &it);
        }
    }
    for (auto& [n, w] : pending) out.push_back({n, std::string(kUniversalType), w});
    return out;
}

inline bool is_variable(const std::string& s) { return !s.empty() && s.front() == '?'; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Domain parsing
// ---------------------------------------------------------------------------

inline DomainModel parse_domain(std::string_view text) {
    using namespace detail;
    SExpr doc = Reader(text).read_document();
    if (!doc.head_is("define") || doc.items.size() < 2 || !doc.items[1].head_is("domain") ||
        doc.items[1].items.size() != 2)
        fail(ErrorCode::syntax, doc, "expected (define (domain <name>) ...)");

    DomainModel dom;
    dom.name = expect_atom(doc.items[1].items[1], "domain name");

    static const std::vector<std::string> kAllowedReq = {":strips", ":typing"};

    // First pass: collect sections so types are known before predicates.
    const SExpr* types_sec = nullptr;
    const SExpr* consts_sec = nullptr;
    const SExpr* preds_sec = nullptr;
    std::vector<const SExpr*> actions;
    for (std::size_t i = 2; i < doc.items.size(); ++i) {
        const SExpr& sec = doc.items[i];
        if (!sec.is_list || sec.items.empty() || sec.items.front().is_list)
            fail(ErrorCode::syntax, sec, "expected a domain section");
        const std::string& key = sec.items.front().atom;
        if (key == ":requirements") {
            for (std::size_t j = 1; j < sec.items.size(); ++j) {
                const std::string& r = expect_atom(sec.items[j], "requirement");
                if (std::find(kAllowedReq.begin(), kAllowedReq.end(), r) == kAllowedReq.end())
                    fail(ErrorCode::unsupported_feature, sec.items[j], "unsupported requirement " + r);
                dom.requirements.push_back(r);
            }
        } else if (key == ":types") {
            types_sec = &sec;
        } else if (key == ":constants") {
            consts_sec = &sec;
        } else if (key == ":predicates") {
            preds_sec = &sec;
        } else if (key == ":action") {
            actions.push_back(&sec);
        } else if (key == ":functions" || key == ":derived" || key == ":durative-action" ||
                   key == ":constraints") {
            fail(ErrorCode::unsupported_feature, sec, "unsupported section " + key);
        } else {
            fail(ErrorCode::syntax, sec, "unknown domain section " + key);
        }
    }

    // Types.
    std::vector<std::pair<std::string, std::string>> type_edges;  // child -> parent
    std::vector<std::string> type_names{std::string(kUniversalType)};
    if (types_sec) {
        for (const auto& tn : parse_typed_list(types_sec->items, 1)) {
            if (tn.name == kUniversalType) continue;
            for (const auto& [c, p] : type_edges)
                if (c == tn.name) fail(ErrorCode::duplicate_name, *tn.where, "type declared twice: " + tn.name);
            type_edges.emplace_back(tn.name, tn.type);
            type_names.push_back(tn.name);
            type_names.push_back(tn.type);
        }
    }
    std::sort(type_names.begin(), type_names.end());
    type_names.erase(std::unique(type_names.begin(), type_names.end()), type_names.end());
    for (const auto& n : type_names) dom.types.push_back({n, std::nullopt});
    for (const auto& [c, p] : type_edges) {
        TypeId ci = *dom.find_type(c);
        if (c != p) dom.types[ci].parent = *dom.find_type(p);
    }
    const TypeId root = dom.universal_type();
    for (TypeId t = 0; t < dom.types.size(); ++t) {
        if (t != root && !dom.types[t].parent) dom.types[t].parent = root;
        // Walk up; a walk longer than the type count is a cycle.
        std::optional<TypeId> cur = t;
        std::size_t steps = 0;
        while (cur) {
            if (++steps > dom.types.size() + 1)
                fail(ErrorCode::type_cycle, types_sec ? *types_sec : doc,
                     "type hierarchy contains a cycle through " + dom.types[t].name);
            cur = dom.types[*cur].parent;
        }
    }

    auto lookup_type = [&](const std::string& n, const SExpr& at) {
        auto t = dom.find_type(n);
        if (!t) fail(ErrorCode::unknown_type, at, "unknown type " + n);
        return *t;
    };

    if (consts_sec) {
        for (const auto& tn : parse_typed_list(consts_sec->items, 1)) {
            for (const auto& c : dom.constants)
                if (c.name == tn.name) fail(ErrorCode::duplicate_name, *tn.where, "duplicate constant " + tn.name);
            dom.constants.push_back({tn.name, lookup_type(tn.type, *tn.where)});
        }
        std::sort(dom.constants.begin(), dom.constants.end(),
                  [](const Constant& a, const Constant& b) { return a.name < b.name; });
    }

    // Predicates.
    if (preds_sec) {
        for (std::size_t i = 1; i < preds_sec->items.size(); ++i) {
            const SExpr& p = preds_sec->items[i];
            if (!p.is_list || p.items.empty()) fail(ErrorCode::syntax, p, "expected predicate declaration");
            PredicateDef def;
            def.name = expect_atom(p.items[0], "predicate name");
            for (const auto& tn : parse_typed_list(p.items, 1)) {
                if (!is_variable(tn.name)) fail(ErrorCode::syntax, *tn.where, "predicate parameter must be a variable");
                def.param_types.push_back(lookup_type(tn.type, *tn.where));
            }
            for (const auto& q : dom.predicates)
                if (q.name == def.name) fail(ErrorCode::duplicate_name, p, "duplicate predicate " + def.name);
            dom.predicates.push_back(std::move(def));
        }
        std::sort(dom.predicates.begin(), dom.predicates.end(),
                  [](const PredicateDef& a, const PredicateDef& b) { return a.name < b.name; });
    }

    // Actions.
    for (const SExpr* a : actions) {
        const auto& it = a->items;
        if (it.size() < 2) fail(ErrorCode::syntax, *a, "action without name");
        ActionSchema schema;
        schema.name = expect_atom(it[1], "action name");
        const SExpr* params = nullptr;
        const SExpr* pre = nullptr;
        const SExpr* eff = nullptr;
        for (std::size_t i = 2; i < it.size(); i += 2) {
            const std::string& key = expect_atom(it[i], "action keyword");
            if (i + 1 >= it.size()) fail(ErrorCode::syntax, it[i], "missing value for " + key);
            if (key == ":parameters") params = &it[i + 1];
            else if (key == ":precondition") pre = &it[i + 1];
            else if (key == ":effect") eff = &it[i + 1];
            else fail(ErrorCode::syntax, it[i], "unknown action keyword " + key);
        }
        if (params) {
            if (!params->is_list) fail(ErrorCode::syntax, *params, "parameters must be a list");
            for (const auto& tn : parse_typed_list(params->items, 0)) {
                if (!is_variable(tn.name)) fail(ErrorCode::syntax, *tn.where, "parameter must be a variable");
                if (std::find(schema.param_names.begin(), schema.param_names.end(), tn.name) !=
                    schema.param_names.end())
                    fail(ErrorCode::duplicate_name, *tn.where, "duplicate parameter " + tn.name);
                schema.param_names.push_back(tn.name);
                schema.param_types.push_back(lookup_type(tn.type, *tn.where));
            }
        }

        auto parse_atom = [&](const SExpr& e) {
            if (!e.is_list || e.items.empty()) fail(ErrorCode::syntax, e, "expected atom");
            const std::string& pn = expect_atom(e.items[0], "predicate name");
            if (pn == "=") fail(ErrorCode::unsupported_feature, e, "equality is not supported");
            auto pid = dom.find_predicate(pn);
            if (!pid) fail(ErrorCode::unknown_predicate, e, "unknown predicate " + pn);
            const PredicateDef& def = dom.predicates[*pid];
            if (e.items.size() - 1 != def.arity())
                fail(ErrorCode::arity_mismatch, e,
                     "predicate " + pn + " expects " + std::to_string(def.arity()) + " arguments");
            AtomSchema atom{*pid, {}};
            for (std::size_t k = 1; k < e.items.size(); ++k) {
                const std::string& arg = expect_atom(e.items[k], "argument");
                TypeId have;
                if (is_variable(arg)) {
                    auto pit = std::find(schema.param_names.begin(), schema.param_names.end(), arg);
                    if (pit == schema.param_names.end())
                        fail(ErrorCode::unknown_variable, e.items[k], "unknown variable " + arg);
                    auto idx = static_cast<std::uint32_t>(pit - schema.param_names.begin());
                    atom.args.push_back({Term::Kind::parameter, idx});
                    have = schema.param_types[idx];
                } else {
                    auto cit = std::find_if(dom.constants.begin(), dom.constants.end(),
                                            [&](const Constant& c) { return c.name == arg; });
                    if (cit == dom.constants.end())
                        fail(ErrorCode::unknown_object, e.items[k], "unknown constant " + arg);
                    atom.args.push_back({Term::Kind::constant, static_cast<std::uint32_t>(cit - dom.constants.begin())});
                    have = cit->type;
                }
                if (!dom.is_subtype(have, def.param_types[k - 1]))
                    fail(ErrorCode::type_mismatch, e.items[k],
                         "argument " + arg + " of " + pn + " has incompatible type");
            }
            return atom;
        };

        auto conjunction = [&](const SExpr& f) -> std::vector<const SExpr*> {
            static const std::vector<std::string> kRejected = {"not", "or", "imply", "forall", "exists",
                                                               "when", "increase", "decrease", "assign"};
            std::vector<const SExpr*> out;
            if (!f.is_list) fail(ErrorCode::syntax, f, "expected formula");
            if (f.items.empty()) return out;
            if (f.head_is("and")) {
                for (std::size_t k = 1; k < f.items.size(); ++k) out.push_back(&f.items[k]);
            } else {
                out.push_back(&f);
            }
            for (const SExpr* x : out) {
                if (!x->is_list || x->items.empty()) fail(ErrorCode::syntax, *x, "expected atom");
                const SExpr& h = x->items.front();
                if (h.is_list) fail(ErrorCode::syntax, *x, "expected atom");
                if (h.atom == "and") fail(ErrorCode::unsupported_feature, *x, "nested conjunctions are not supported");
                for (const auto& r : kRejected)
                    if (h.atom == r && r != "not")
                        fail(ErrorCode::unsupported_feature, *x, "'" + r + "' is not supported");
            }
            return out;
        };

        if (pre) {
            for (const SExpr* x : conjunction(*pre)) {
                if (x->head_is("not")) fail(ErrorCode::unsupported_feature, *x, "negative preconditions are not supported");
                schema.pre.push_back(parse_atom(*x));
            }
        }
        if (eff) {
            for (const SExpr* x : conjunction(*eff)) {
                if (x->head_is("not")) {
                    if (x->items.size() != 2) fail(ErrorCode::syntax, *x, "malformed negative effect");
                    schema.del.push_back(parse_atom(x->items[1]));
                } else {
                    schema.add.push_back(parse_atom(*x));
                }
            }
        }
        for (const auto& s : dom.schemas)
            if (s.name == schema.name) fail(ErrorCode::duplicate_name, *a, "duplicate action " + schema.name);
        dom.schemas.push_back(std::move(schema));
    }
    std::sort(dom.schemas.begin(), dom.schemas.end(),
              [](const ActionSchema& x, const ActionSchema& y) { return x.name < y.name; });
    return dom;
}

/// Predicates that occur in no schema's add or delete list.
inline std::vector<PredicateId> detect_static_predicates(const DomainModel& dom) {
    std::vector<bool> fluent(dom.predicates.size(), false);
    for (const auto& s : dom.schemas) {
        for (const auto& a : s.add) fluent[a.predicate] = true;
        for (const auto& a : s.del) fluent[a.predicate] = true;
    }
    std::vector<PredicateId> out;
    for (PredicateId p = 0; p < fluent.size(); ++p)
        if (!fluent[p]) out.push_back(p);
    return out;
}

namespace detail {

inline void finish_problem(LiftedProblem& prob) {
    const DomainModel& dom = prob.dom();
    prob.static_predicate.assign(dom.predicates.size(), false);
    for (PredicateId p : detect_static_predicates(dom)) prob.static_predicate[p] = true;
    prob.static_props.clear();
    for (const auto& p : prob.init)
        if (prob.static_predicate[p.predicate]) prob.static_props.push_back(p);
    std::sort(prob.goal.begin(), prob.goal.end());
    prob.goal.erase(std::unique(prob.goal.begin(), prob.goal.end()), prob.goal.end());
}

}  // namespace detail

inline LiftedProblem parse_problem(std::string_view text, std::shared_ptr<const DomainModel> domain) {
    using namespace detail;
    SExpr doc = Reader(text).read_document();
    if (!doc.head_is("define") || doc.items.size() < 2 || !doc.items[1].head_is("problem") ||
        doc.items[1].items.size() != 2)
        fail(ErrorCode::syntax, doc, "expected (define (problem <name>) ...)");
    const DomainModel& dom = *domain;

    LiftedProblem prob;
    prob.name = expect_atom(doc.items[1].items[1], "problem name");
    prob.domain = domain;

    const SExpr* objs = nullptr;
    const SExpr* init = nullptr;
    const SExpr* goal = nullptr;
    for (std::size_t i = 2; i < doc.items.size(); ++i) {
        const SExpr& sec = doc.items[i];
        if (!sec.is_list || sec.items.empty() || sec.items.front().is_list)
            fail(ErrorCode::syntax, sec, "expected a problem section");
        const std::string& key = sec.items.front().atom;
        if (key == ":domain") {
            if (sec.items.size() != 2 || expect_atom(sec.items[1], "domain name") != dom.name)
                fail(ErrorCode::domain_mismatch, sec, "problem refers to a different domain");
        } else if (key == ":objects") {
            objs = &sec;
        } else if (key == ":init") {
            init = &sec;
        } else if (key == ":goal") {
            goal = &sec;
        } else if (key == ":requirements") {
            for (std::size_t j = 1; j < sec.items.size(); ++j) {
                const std::string& r = expect_atom(sec.items[j], "requirement");
                if (r != ":strips" && r != ":typing")
                    fail(ErrorCode::unsupported_feature, sec.items[j], "unsupported requirement " + r);
            }
        } else if (key == ":metric" || key == ":constraints") {
            fail(ErrorCode::unsupported_feature, sec, "unsupported section " + key);
        } else {
            fail(ErrorCode::syntax, sec, "unknown problem section " + key);
        }
    }

    std::vector<Object> objects;
    for (const auto& c : dom.constants) objects.push_back({c.name, c.type});
    if (objs) {
        for (const auto& tn : parse_typed_list(objs->items, 1)) {
            auto t = dom.find_type(tn.type);
            if (!t) fail(ErrorCode::unknown_type, *tn.where, "object " + tn.name + " has unknown type " + tn.type);
            for (const auto& o : objects)
                if (o.name == tn.name) fail(ErrorCode::duplicate_name, *tn.where, "duplicate object " + tn.name);
            objects.push_back({tn.name, *t});
        }
    }
    std::sort(objects.begin(), objects.end(), [](const Object& a, const Object& b) { return a.name < b.name; });
    prob.objects = std::move(objects);
    for (const auto& c : dom.constants) prob.constant_objects.push_back(*prob.find_object(c.name));

    auto ground_atom = [&](const SExpr& e) {
        if (!e.is_list || e.items.empty()) fail(ErrorCode::syntax, e, "expected atom");
        const std::string& pn = expect_atom(e.items[0], "predicate name");
        if (pn == "not") fail(ErrorCode::unsupported_feature, e, "negative literals are not supported");
        if (pn == "=") fail(ErrorCode::unsupported_feature, e, "equality is not supported");
        if (pn == "and" || pn == "or" || pn == "forall" || pn == "exists" || pn == "imply")
            fail(ErrorCode::unsupported_feature, e, "'" + pn + "' is not supported here");
        auto pid = dom.find_predicate(pn);
        if (!pid) fail(ErrorCode::unknown_predicate, e, "unknown predicate " + pn);
        const PredicateDef& def = dom.predicates[*pid];
        if (e.items.size() - 1 != def.arity())
            fail(ErrorCode::arity_mismatch, e, "predicate " + pn + " expects " + std::to_string(def.arity()) + " arguments");
        Proposition prop{*pid, {}};
        for (std::size_t k = 1; k < e.items.size(); ++k) {
            const std::string& on = expect_atom(e.items[k], "object name");
            auto oid = prob.find_object(on);
            if (!oid) fail(ErrorCode::unknown_object, e.items[k], "unknown object " + on);
            if (!dom.is_subtype(prob.objects[*oid].type, def.param_types[k - 1]))
                fail(ErrorCode::type_mismatch, e.items[k], "object " + on + " has incompatible type for " + pn);
            prop.args.push_back(*oid);
        }
        return prop;
    };

    std::vector<Proposition> init_props;
    if (init)
        for (std::size_t i = 1; i < init->items.size(); ++i) init_props.push_back(ground_atom(init->items[i]));
    prob.init = State(std::move(init_props));

    if (goal) {
        if (goal->items.size() != 2) fail(ErrorCode::syntax, *goal, "goal must contain one formula");
        const SExpr& f = goal->items[1];
        if (f.head_is("and")) {
            for (std::size_t k = 1; k < f.items.size(); ++k) prob.goal.push_back(ground_atom(f.items[k]));
        } else if (f.is_list && !f.items.empty()) {
            prob.goal.push_back(ground_atom(f));
        } else if (!f.is_list || !f.items.empty()) {
            fail(ErrorCode::syntax, f, "malformed goal");
        }
    }
    detail::finish_problem(prob);
    return prob;
}

/// Builds a problem with a replaced goal, keeping everything else.
inline LiftedProblem with_goal(const LiftedProblem& base, std::vector<Proposition> goal, std::string name) {
    LiftedProblem p = base;
    p.name = std::move(name);
    p.goal = std::move(goal);
    detail::finish_problem(p);
    return p;
}

inline LiftedProblem with_init(const LiftedProblem& base, State init) {
    LiftedProblem p = base;
    p.init = std::move(init);
    detail::finish_problem(p);
    return p;
}

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

inline std::string to_string(const LiftedProblem& prob, const Proposition& p) {
    std::string s = "(" + prob.dom().predicates[p.predicate].name;
    for (ObjectId a : p.args) s += " " + prob.objects[a].name;
    return s + ")";
}

inline std::string to_string(const LiftedProblem& prob, const GroundAction& a) {
    std::string s = "(" + prob.dom().schemas[a.schema].name;
    for (ObjectId o : a.args) s += " " + prob.objects[o].name;
    return s + ")";
}

inline std::string write_domain(const DomainModel& dom) {
    std::ostringstream os;
    os << "(define (domain " << dom.name << ")\n";
    if (!dom.requirements.empty()) {
        os << "  (:requirements";
        for (const auto& r : dom.requirements) os << ' ' << r;
        os << ")\n";
    }
    os << "  (:types";
    for (const auto& t : dom.types)
        if (t.parent) os << ' ' << t.name << " - " << dom.types[*t.parent].name;
    os << ")\n";
    if (!dom.constants.empty()) {
        os << "  (:constants";
        for (const auto& c : dom.constants) os << ' ' << c.name << " - " << dom.types[c.type].name;
        os << ")\n";
    }
    os << "  (:predicates";
    for (const auto& p : dom.predicates) {
        os << " (" << p.name;
        for (std::size_t i = 0; i < p.arity(); ++i) os << " ?x" << i << " - " << dom.types[p.param_types[i]].name;
        os << ')';
    }
    os << ")\n";
    for (const auto& s : dom.schemas) {
        auto atom = [&](const AtomSchema& a) {
            std::string r = "(" + dom.predicates[a.predicate].name;
            for (const auto& t : a.args)
                r += " " + (t.kind == Term::Kind::parameter ? s.param_names[t.index] : dom.constants[t.index].name);
            return r + ")";
        };
        os << "  (:action " << s.name << "\n    :parameters (";
        for (std::size_t i = 0; i < s.arity(); ++i)
            os << (i ? " " : "") << s.param_names[i] << " - " << dom.types[s.param_types[i]].name;
        os << ")\n    :precondition (and";
        for (const auto& a : s.pre) os << ' ' << atom(a);
        os << ")\n    :effect (and";
        for (const auto& a : s.add) os << ' ' << atom(a);
        for (const auto& a : s.del) os << " (not " << atom(a) << ')';
        os << "))\n";
    }
    os << ")\n";
    return os.str();
}

inline std::string write_problem(const LiftedProblem& prob) {
    const DomainModel& dom = prob.dom();
    std::ostringstream os;
    os << "(define (problem " << prob.name << ")\n  (:domain " << dom.name << ")\n  (:objects";
    for (const auto& o : prob.objects) {
        bool is_const = std::any_of(dom.constants.begin(), dom.constants.end(),
                                    [&](const Constant& c) { return c.name == o.name; });
        if (!is_const) os << ' ' << o.name << " - " << dom.types[o.type].name;
    }
    os << ")\n  (:init";
    for (const auto& p : prob.init) os << ' ' << to_string(prob, p);
    os << ")\n  (:goal (and";
    for (const auto& p : prob.goal) os << ' ' << to_string(prob, p);
    os << "))\n)\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Grounding and successor semantics
// ---------------------------------------------------------------------------

inline GroundAction instantiate(const LiftedProblem& prob, std::uint32_t schema_index, std::vector<ObjectId> args) {
    const ActionSchema& s = prob.dom().schemas[schema_index];
    auto ground = [&](const std::vector<AtomSchema>& atoms) {
        std::vector<Proposition> out;
        out.reserve(atoms.size());
        for (const auto& a : atoms) {
            Proposition p{a.predicate, {}};
            p.args.reserve(a.args.size());
            for (const auto& t : a.args)
                p.args.push_back(t.kind == Term::Kind::parameter ? args[t.index] : prob.constant_objects[t.index]);
            out.push_back(std::move(p));
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    };
    GroundAction g;
    g.schema = schema_index;
    g.pre = ground(s.pre);
    g.add = ground(s.add);
    g.del = ground(s.del);
    g.args = std::move(args);
    return g;
}

namespace detail {

inline constexpr ObjectId kUnbound = std::numeric_limits<ObjectId>::max();

class Grounder {
public:
    Grounder(const LiftedProblem& prob, const State& state) : prob_(prob), dom_(prob.dom()) {
        buckets_.resize(dom_.predicates.size());
        for (const auto& p : state) buckets_[p.predicate].push_back(&p);
        for (const auto& p : prob.static_props)
            if (!state.contains(p)) buckets_[p.predicate].push_back(&p);
        objects_by_type_.resize(dom_.types.size());
        for (TypeId t = 0; t < dom_.types.size(); ++t)
            for (ObjectId o = 0; o < prob.objects.size(); ++o)
                if (dom_.is_subtype(prob.objects[o].type, t)) objects_by_type_[t].push_back(o);
    }

    std::vector<GroundAction> run() {
        std::vector<GroundAction> result;
        for (std::uint32_t si = 0; si < dom_.schemas.size(); ++si) {
            const ActionSchema& s = dom_.schemas[si];
            order_ = plan_join(s);
            binding_.assign(s.arity(), kUnbound);
            tuples_.clear();
            join(s, 0);
            std::sort(tuples_.begin(), tuples_.end());
            tuples_.erase(std::unique(tuples_.begin(), tuples_.end()), tuples_.end());
            for (auto& t : tuples_) result.push_back(instantiate(prob_, si, std::move(t)));
        }
        return result;
    }

private:
    // Most-constrained-first: prefer atoms with more already-bound variables,
    // then smaller candidate buckets.
    std::vector<const AtomSchema*> plan_join(const ActionSchema& s) const {
        std::vector<const AtomSchema*> rest;
        for (const auto& a : s.pre) rest.push_back(&a);
        std::vector<bool> bound(s.arity(), false);
        std::vector<const AtomSchema*> order;
        while (!rest.empty()) {
            std::size_t best = 0;
            long best_score = std::numeric_limits<long>::min();
            for (std::size_t i = 0; i < rest.size(); ++i) {
                long nb = 0;
                for (const auto& t : rest[i]->args)
                    if (t.kind == Term::Kind::constant || bound[t.index]) ++nb;
                long score = nb * 1'000'000L - static_cast<long>(buckets_[rest[i]->predicate].size());
                if (score > best_score) {
                    best_score = score;
                    best = i;
                }
            }
            for (const auto& t : rest[best]->args)
                if (t.kind == Term::Kind::parameter) bound[t.index] = true;
            order.push_back(rest[best]);
            rest.erase(rest.begin() + static_cast<long>(best));
        }
        return order;
    }

    void join(const ActionSchema& s, std::size_t k) {
        if (k == order_.size()) {
            enumerate_free(s, 0);
            return;
        }
        const AtomSchema& atom = *order_[k];
        for (const Proposition* p : buckets_[atom.predicate]) {
            std::vector<std::uint32_t> newly;
            bool ok = true;
            for (std::size_t i = 0; i < atom.args.size() && ok; ++i) {
                const Term& t = atom.args[i];
                ObjectId o = p->args[i];
                if (t.kind == Term::Kind::constant) {
                    ok = prob_.constant_objects[t.index] == o;
                } else if (binding_[t.index] == kUnbound) {
                    if (!dom_.is_subtype(prob_.objects[o].type, s.param_types[t.index])) {
                        ok = false;
                    } else {
                        binding_[t.index] = o;
                        newly.push_back(t.index);
                    }
                } else {
                    ok = binding_[t.index] == o;
                }
            }
            if (ok) join(s, k + 1);
            for (auto i : newly) binding_[i] = kUnbound;
        }
    }

    void enumerate_free(const ActionSchema& s, std::size_t param) {
        if (param == s.arity()) {
            tuples_.push_back(binding_);
            return;
        }
        if (binding_[param] != kUnbound) {
            enumerate_free(s, param + 1);
            return;
        }
        for (ObjectId o : objects_by_type_[s.param_types[param]]) {
            binding_[param] = o;
            enumerate_free(s, param + 1);
        }
        binding_[param] = kUnbound;
    }

    const LiftedProblem& prob_;
    const DomainModel& dom_;
    std::vector<std::vector<const Proposition*>> buckets_;
    std::vector<std::vector<ObjectId>> objects_by_type_;
    std::vector<const AtomSchema*> order_;
    std::vector<ObjectId> binding_;
    std::vector<std::vector<ObjectId>> tuples_;
};

}  // namespace detail

/// All type-correct ground actions whose preconditions hold in `state`
/// (static propositions of the problem count as true). Ordered by schema
/// name, then argument names.
inline std::vector<GroundAction> applicable_actions(const LiftedProblem& prob, const State& state) {
    return detail::Grounder(prob, state).run();
}

inline bool is_applicable(const LiftedProblem& prob, const State& state, const GroundAction& a) {
    for (const auto& p : a.pre)
        if (!state.contains(p) && !std::binary_search(prob.static_props.begin(), prob.static_props.end(), p))
            return false;
    return true;
}

class InapplicableAction : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// (state \ del) ∪ add without an applicability check.
inline State apply_unchecked(const State& state, const GroundAction& a) {
    std::vector<Proposition> out;
    out.reserve(state.size() + a.add.size());
    for (const auto& p : state)
        if (!std::binary_search(a.del.begin(), a.del.end(), p)) out.push_back(p);
    out.insert(out.end(), a.add.begin(), a.add.end());
    return State(std::move(out));
}

inline State apply(const LiftedProblem& prob, const State& state, const GroundAction& a) {
    if (!is_applicable(prob, state, a))
        throw InapplicableAction("action " + to_string(prob, a) + " is not applicable");
    return apply_unchecked(state, a);
}

}  // namespace symplan::pddl
