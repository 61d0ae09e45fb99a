// Bottom-up saturation over node types.
//
// A node type records, for one tree node: its element name; the values at
// that node of the bodies of every <1>- and <2>-modality (what a parent needs
// to know about its successor); the assumed values of the node's <-1>/<-2>
// modalities (three-valued, unconstrained when the node's own evaluation never
// looked at them); and whether the goal holds somewhere in the subtree. Types
// are built from the types of their successors and checked against the
// successors' upward assumptions. Propositions and attributes are decided per
// node by a small local SAT search and only materialized for the witness.

#include "treesat/solver.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>

#include "treesat/errors.hpp"
#include "treesat/logic.hpp"

namespace treesat {

namespace {

enum class Op : std::uint8_t { True, False, Name, NotName, Lit, NotLit, And, Or, Var, Mod, NoSucc };

struct Node {
    Op op;
    int a;
    int b;
};

// Programs are indexed as in the Program enum: 0=1, 1=2, 2=-1, 3=-2.
struct Entry {
    int prog;
    int body;
};

using Bits = std::vector<std::uint64_t>;

inline bool get_bit(const Bits& b, int i) { return (b[i >> 6] >> (i & 63)) & 1u; }
inline void set_bit(Bits& b, int i) { b[i >> 6] |= std::uint64_t(1) << (i & 63); }
inline Bits zero_bits(std::size_t n) { return Bits((n + 63) / 64, 0); }

void append_key(std::string& key, const Bits& b) {
    key.append(reinterpret_cast<const char*>(b.data()), b.size() * sizeof(std::uint64_t));
}

// ------------------------------------------------------------------ the DAG

class Dag {
public:
    Dag() {
        mk(Op::True, 0, 0);
        mk(Op::False, 0, 0);
    }
    static constexpr int T = 0;
    static constexpr int F = 1;

    std::vector<Node> nodes;
    std::vector<char> local;  // only literals below

    int mk(Op op, int a, int b) {
        if ((op == Op::And || op == Op::Or) && a > b) std::swap(a, b);
        std::uint64_t key = (std::uint64_t(op) << 60) | (std::uint64_t(std::uint32_t(a + 1)) << 30) |
                            std::uint64_t(std::uint32_t(b + 1));
        auto it = index_.find(key);
        if (it != index_.end()) return it->second;
        int id = static_cast<int>(nodes.size());
        nodes.push_back({op, a, b});
        char loc = 0;
        if (op == Op::Lit || op == Op::NotLit) loc = 1;
        if (op == Op::And || op == Op::Or) loc = local[a] && local[b];
        local.push_back(loc);
        index_.emplace(key, id);
        return id;
    }

    int land(int x, int y) {
        if (x == F || y == F) return F;
        if (x == T) return y;
        if (y == T || x == y) return x;
        return mk(Op::And, x, y);
    }

    int lor(int x, int y) {
        if (x == T || y == T) return T;
        if (x == F) return y;
        if (y == F || x == y) return x;
        return mk(Op::Or, x, y);
    }

private:
    std::unordered_map<std::uint64_t, int> index_;
};

// ---------------------------------------------------------------- compiling

struct Compiled {
    Dag dag;
    std::vector<std::string> names;  // last one stands for every other name
    std::vector<std::string> props;
    std::vector<std::string> attrs;
    std::vector<int> var_body;
    std::vector<Entry> entries;
    int goal = Dag::F;

    int natoms() const { return static_cast<int>(props.size() + attrs.size()); }
};

class Compiler {
public:
    explicit Compiler(Compiled& c) : c_(c) {}

    void run(const FormulaPtr& nnf) {
        for (const auto& n : element_names_in(nnf)) c_.names.push_back(n);
        std::string other = "other";
        for (int k = 1; std::find(c_.names.begin(), c_.names.end(), other) != c_.names.end(); ++k)
            other = "other" + std::to_string(k);
        c_.names.push_back(other);
        for (std::size_t i = 0; i + 1 < c_.names.size(); ++i) name_id_[c_.names[i]] = static_cast<int>(i);

        auto props = propositions_in(nnf);
        if (contains_start(nnf)) props.insert("#");
        for (const auto& p : props) c_.props.push_back(p);
        for (const auto& a : attribute_names_in(nnf)) c_.attrs.push_back(a);
        for (std::size_t i = 0; i < c_.props.size(); ++i) atom_id_["p" + c_.props[i]] = static_cast<int>(i);
        for (std::size_t i = 0; i < c_.attrs.size(); ++i)
            atom_id_["a" + c_.attrs[i]] = static_cast<int>(c_.props.size() + i);

        for (int p = 0; p < 4; ++p) entry(p, Dag::T);
        scopes_.emplace_back();
        c_.goal = compile(nnf, 0);
    }

    int entry(int prog, int body) {
        auto key = std::make_pair(prog, body);
        auto it = entry_index_.find(key);
        if (it != entry_index_.end()) return it->second;
        int id = static_cast<int>(c_.entries.size());
        c_.entries.push_back({prog, body});
        entry_index_.emplace(key, id);
        return id;
    }

private:
    int atom(const Formula& f) {
        if (f.kind == FormulaKind::Start) return atom_id_.at("p#");
        if (f.kind == FormulaKind::Prop) return atom_id_.at("p" + f.name);
        return atom_id_.at("a" + f.name);
    }

    int compile(const FormulaPtr& f, int scope) {
        auto key = std::make_pair(f.get(), scope);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        int r = compile_uncached(f, scope);
        memo_.emplace(key, r);
        return r;
    }

    int compile_uncached(const FormulaPtr& f, int scope) {
        Dag& d = c_.dag;
        switch (f->kind) {
        case FormulaKind::True: return Dag::T;
        case FormulaKind::False: return Dag::F;
        case FormulaKind::Name: return d.mk(Op::Name, name_id_.at(f->name), 0);
        case FormulaKind::Prop:
        case FormulaKind::Start:
        case FormulaKind::Attribute: return d.mk(Op::Lit, atom(*f), 0);
        case FormulaKind::And: return d.land(compile(f->kids[0], scope), compile(f->kids[1], scope));
        case FormulaKind::Or: return d.lor(compile(f->kids[0], scope), compile(f->kids[1], scope));
        case FormulaKind::Not: {
            const Formula& g = *f->kids[0];
            switch (g.kind) {
            case FormulaKind::Name: return d.mk(Op::NotName, name_id_.at(g.name), 0);
            case FormulaKind::Prop:
            case FormulaKind::Start:
            case FormulaKind::Attribute: return d.mk(Op::NotLit, atom(g), 0);
            case FormulaKind::Modality:
                if (g.kids[0]->kind == FormulaKind::True) return d.mk(Op::NoSucc, static_cast<int>(g.program), 0);
                break;
            default: break;
            }
            throw std::logic_error("formula is not in negation normal form: " + to_string(f));
        }
        case FormulaKind::Modality: {
            int body = compile(f->kids[0], scope);
            if (body == Dag::F) return Dag::F;
            return d.mk(Op::Mod, entry(static_cast<int>(f->program), body), 0);
        }
        case FormulaKind::Variable: {
            const auto& env = scopes_[scope];
            auto v = env.find(f->name);
            if (v == env.end()) throw Error("unbound variable $" + f->name);
            return d.mk(Op::Var, v->second, 0);
        }
        case FormulaKind::Let: {
            std::map<std::string, int> env = scopes_[scope];
            std::vector<int> ids;
            for (const auto& b : f->bindings) {
                int id = static_cast<int>(c_.var_body.size());
                c_.var_body.push_back(Dag::F);
                env[b.var] = id;
                ids.push_back(id);
            }
            int inner = static_cast<int>(scopes_.size());
            scopes_.push_back(std::move(env));
            for (std::size_t i = 0; i < f->bindings.size(); ++i) {
                int body = compile(f->bindings[i].body, inner);
                c_.var_body[ids[i]] = body;
            }
            return compile(f->kids[0], inner);
        }
        default: throw std::logic_error("unexpected formula in solver input: " + to_string(f));
        }
    }

    struct PairHash {
        std::size_t operator()(const std::pair<const Formula*, int>& p) const {
            return std::hash<const void*>()(p.first) * 31 + static_cast<std::size_t>(p.second);
        }
    };

    Compiled& c_;
    std::map<std::string, int> name_id_;
    std::map<std::string, int> atom_id_;
    std::map<std::pair<int, int>, int> entry_index_;
    std::vector<std::map<std::string, int>> scopes_;
    std::unordered_map<std::pair<const Formula*, int>, int, PairHash> memo_;
};

// ------------------------------------------------------- local propositional

// Satisfiability of conjunctions of (literal-only node, required value).
class LocalSat {
public:
    using Constraints = std::vector<std::pair<int, bool>>;

    LocalSat(const Dag& d, int natoms) : d_(d), natoms_(natoms) {}

    // Returns a model (one value per atom) or nothing.
    const std::optional<std::vector<std::int8_t>>& solve(Constraints cs) {
        std::sort(cs.begin(), cs.end());
        cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
        auto it = cache_.find(cs);
        if (it != cache_.end()) return it->second;
        std::vector<std::int8_t> assign(natoms_, -1);
        std::optional<std::vector<std::int8_t>> result;
        if (dpll(cs, assign)) {
            for (auto& v : assign)
                if (v < 0) v = 0;
            result = assign;
        }
        return cache_.emplace(std::move(cs), std::move(result)).first->second;
    }

    bool sat(const Constraints& cs) { return solve(cs).has_value(); }

private:
    std::int8_t eval(int n, const std::vector<std::int8_t>& a) const {
        const Node& nd = d_.nodes[n];
        switch (nd.op) {
        case Op::True: return 1;
        case Op::False: return 0;
        case Op::Lit: return a[nd.a];
        case Op::NotLit: return a[nd.a] < 0 ? -1 : !a[nd.a];
        case Op::And: {
            auto x = eval(nd.a, a);
            if (x == 0) return 0;
            auto y = eval(nd.b, a);
            if (y == 0) return 0;
            return (x == 1 && y == 1) ? 1 : -1;
        }
        case Op::Or: {
            auto x = eval(nd.a, a);
            if (x == 1) return 1;
            auto y = eval(nd.b, a);
            if (y == 1) return 1;
            return (x == 0 && y == 0) ? 0 : -1;
        }
        default: throw std::logic_error("non-local node in local constraint");
        }
    }

    int pick(int n, const std::vector<std::int8_t>& a) const {
        const Node& nd = d_.nodes[n];
        if (nd.op == Op::Lit || nd.op == Op::NotLit) return nd.a;
        return eval(nd.a, a) < 0 ? pick(nd.a, a) : pick(nd.b, a);
    }

    bool dpll(const Constraints& cs, std::vector<std::int8_t>& a) const {
        int choice = -1;
        for (const auto& [n, want] : cs) {
            auto v = eval(n, a);
            if (v < 0) {
                if (choice < 0) choice = pick(n, a);
            } else if ((v == 1) != want) {
                return false;
            }
        }
        if (choice < 0) return true;
        for (std::int8_t v : {0, 1}) {
            a[choice] = v;
            if (dpll(cs, a)) return true;
        }
        a[choice] = -1;
        return false;
    }

    const Dag& d_;
    int natoms_;
    std::map<Constraints, std::optional<std::vector<std::int8_t>>> cache_;
};

// ---------------------------------------------------------------- saturation

struct NodeType {
    int name;
    Bits s[2];    // values of <1>/<2> bodies at this node
    Bits upk[2];  // which <-1>/<-2> entries are assumed
    Bits upv[2];  // assumed values
    bool mark = false;
    bool goal_here = false;
    int succ[2] = {-1, -1};
    int round = 0;
    LocalSat::Constraints locals;
};

struct Group {
    int rep;
    int round;
};

class Saturation {
public:
    Saturation(Compiled& c, const SolverOptions& opts) : c_(c), d_(c.dag), opts_(opts), sat_(d_, c.natoms()) {}

    SatResult run() {
        prepare();
        SatResult res;
        res.lean_size = c_.names.size() + c_.props.size() + c_.attrs.size() + c_.entries.size();
        int round = 0;
        for (;; ++round) {
            round_ = round;
            if (round == 0) {
                for (int l = 0; l < nnames_; ++l) {
                    construct(l, -1, -1);
                    if (found_ >= 0) break;
                }
            } else {
                expand_round(round);
            }
            if (found_ >= 0) break;
            bool fresh_groups = false;
            for (const auto& g : groups_)
                if (g.round == round) {
                    fresh_groups = true;
                    break;
                }
            if (!fresh_groups) break;
        }
        res.rounds = round + 1;
        res.types = types_.size();
        if (found_ < 0) return res;
        res.sat = true;
        build_witness(found_, res);
        return res;
    }

private:
    // --- setup

    void prepare() {
        nnames_ = static_cast<int>(c_.names.size());
        for (int e = 0; e < static_cast<int>(c_.entries.size()); ++e) {
            int p = c_.entries[e].prog;
            pos_.push_back(static_cast<int>(by_prog_[p].size()));
            by_prog_[p].push_back(e);
        }
        for (int p = 0; p < 4; ++p) {
            probe_pos_[p] = -1;
            for (std::size_t i = 0; i < by_prog_[p].size(); ++i)
                if (c_.entries[by_prog_[p][i]].body == Dag::T) probe_pos_[p] = static_cast<int>(i);
        }

        body_.assign(nnames_, {});
        up_body_.assign(nnames_, {});
        goal_.assign(nnames_, Dag::F);
        nonconst_.assign(nnames_, {});
        base_.assign(nnames_, {});
        for (int l = 0; l < nnames_; ++l) {
            for (int r = 0; r < 2; ++r) {
                base_[l][r] = zero_bits(by_prog_[r].size());
                for (std::size_t i = 0; i < by_prog_[r].size(); ++i) {
                    int s = spec(c_.entries[by_prog_[r][i]].body, l);
                    body_[l][r].push_back(s);
                    if (s == Dag::T) set_bit(base_[l][r], static_cast<int>(i));
                    else if (s != Dag::F) nonconst_[l][r].push_back(static_cast<int>(i));
                }
                for (int e : by_prog_[2 + r]) up_body_[l][r].push_back(spec(c_.entries[e].body, l));
            }
            goal_[l] = spec(c_.goal, l);
        }

        // successor bits each name can observe, and the grouping classes
        stamp_.assign(d_.nodes.size(), 0);
        val_.assign(d_.nodes.size(), -1);
        for (int r = 0; r < 2; ++r) class_of_[r].assign(nnames_, 0);
        std::map<std::string, int> class_ids[2];
        for (int l = 0; l < nnames_; ++l) {
            Bits seen[2] = {zero_bits(by_prog_[0].size()), zero_bits(by_prog_[1].size())};
            ++cur_stamp_;
            std::vector<int> roots;
            for (int r = 0; r < 2; ++r) {
                roots.insert(roots.end(), body_[l][r].begin(), body_[l][r].end());
                roots.insert(roots.end(), up_body_[l][r].begin(), up_body_[l][r].end());
            }
            roots.push_back(goal_[l]);
            while (!roots.empty()) {
                int n = roots.back();
                roots.pop_back();
                if (stamp_[n] == cur_stamp_) continue;
                stamp_[n] = cur_stamp_;
                const Node& nd = d_.nodes[n];
                if (nd.op == Op::And || nd.op == Op::Or) {
                    roots.push_back(nd.a);
                    roots.push_back(nd.b);
                } else if (nd.op == Op::Mod && c_.entries[nd.a].prog < 2) {
                    set_bit(seen[c_.entries[nd.a].prog], pos_[nd.a]);
                }
            }
            for (int r = 0; r < 2; ++r) {
                std::string key;
                append_key(key, seen[r]);
                auto [it, fresh] = class_ids[r].emplace(key, static_cast<int>(class_mask_[r].size()));
                if (fresh) class_mask_[r].push_back(seen[r]);
                class_of_[r][l] = it->second;
            }
        }
        for (int r = 0; r < 2; ++r) {
            class_groups_[r].assign(class_mask_[r].size(), {});
            class_index_[r].assign(class_mask_[r].size(), {});
        }
        for (int d = 0; d < 2; ++d) up_assign_[d].assign(by_prog_[2 + d].size(), -1);
        stamp_.assign(d_.nodes.size(), 0);
        cur_stamp_ = 0;
    }

    int spec(int n, int l) {
        std::uint64_t key = std::uint64_t(n) * std::uint64_t(nnames_) + std::uint64_t(l);
        auto it = spec_memo_.find(key);
        if (it != spec_memo_.end()) return it->second;
        Node nd = d_.nodes[n];
        int r = n;
        switch (nd.op) {
        case Op::Name: r = nd.a == l ? Dag::T : Dag::F; break;
        case Op::NotName: r = nd.a == l ? Dag::F : Dag::T; break;
        case Op::Var: r = spec(c_.var_body[nd.a], l); break;
        case Op::And: {
            int x = spec(nd.a, l);
            r = x == Dag::F ? Dag::F : d_.land(x, spec(nd.b, l));
            break;
        }
        case Op::Or: {
            int x = spec(nd.a, l);
            r = x == Dag::T ? Dag::T : d_.lor(x, spec(nd.b, l));
            break;
        }
        default: break;
        }
        if (d_.local[r] && (d_.nodes[r].op == Op::And || d_.nodes[r].op == Op::Or)) r = fold_local(r);
        spec_memo_.emplace(key, r);
        return r;
    }

    int fold_local(int n) {
        auto it = fold_memo_.find(n);
        if (it != fold_memo_.end()) return it->second;
        int r = n;
        if (!sat_.sat({{n, false}})) r = Dag::T;
        else if (!sat_.sat({{n, true}})) r = Dag::F;
        fold_memo_.emplace(n, r);
        return r;
    }

    // --- three-valued evaluation at the node under construction

    std::int8_t up_value(int d, int i) const {
        const auto& a = up_assign_[d];
        if (a[i] >= 0) return a[i];
        int pd = probe_pos_[2 + d];
        if (i != pd && a[pd] == 0) return 0;
        if (up_assign_[1 - d][probe_pos_[3 - d]] == 1) return 0;
        return -1;
    }

    std::int8_t local_value(int n) const {
        for (const auto& [m, v] : locals_)
            if (m == n) return v ? 1 : 0;
        return -1;
    }

    std::int8_t ev(int n) {
        if (stamp_[n] == cur_stamp_) return val_[n];
        const Node& nd = d_.nodes[n];
        std::int8_t r = -1;
        if (d_.local[n]) {
            r = local_value(n);
        } else {
            switch (nd.op) {
            case Op::True: r = 1; break;
            case Op::False: r = 0; break;
            case Op::And: {
                auto x = ev(nd.a);
                if (x == 0) {
                    r = 0;
                    break;
                }
                auto y = ev(nd.b);
                r = y == 0 ? 0 : (x == 1 && y == 1) ? 1 : -1;
                break;
            }
            case Op::Or: {
                auto x = ev(nd.a);
                if (x == 1) {
                    r = 1;
                    break;
                }
                auto y = ev(nd.b);
                r = y == 1 ? 1 : (x == 0 && y == 0) ? 0 : -1;
                break;
            }
            case Op::Mod: {
                const Entry& e = c_.entries[nd.a];
                if (e.prog < 2) {
                    int t = succ_[e.prog];
                    r = t < 0 ? 0 : get_bit(types_[t].s[e.prog], pos_[nd.a]);
                } else {
                    r = up_value(e.prog - 2, pos_[nd.a]);
                }
                break;
            }
            case Op::NoSucc: {
                int p = nd.a;
                if (p < 2) {
                    r = succ_[p] < 0 ? 1 : 0;
                } else {
                    auto v = up_value(p - 2, probe_pos_[p]);
                    r = v < 0 ? -1 : !v;
                }
                break;
            }
            default: throw std::logic_error("unspecialized node during evaluation");
            }
        }
        stamp_[n] = cur_stamp_;
        val_[n] = r;
        return r;
    }

    struct Choice {
        bool local;
        int a;  // local node, or direction
        int b;  // entry position
    };

    Choice pick(int n) {
        for (;;) {
            const Node& nd = d_.nodes[n];
            if (d_.local[n]) return {true, n, 0};
            switch (nd.op) {
            case Op::And:
            case Op::Or: n = ev(nd.a) < 0 ? nd.a : nd.b; break;
            case Op::Mod: return {false, c_.entries[nd.a].prog - 2, pos_[nd.a]};
            case Op::NoSucc: return {false, nd.a - 2, probe_pos_[nd.a]};
            default: throw std::logic_error("cannot split on a determined node");
            }
        }
    }

    bool assign(const Choice& ch, bool v) {
        if (ch.local) {
            locals_.push_back({ch.a, v});
            if (!sat_.sat(locals_)) {
                locals_.pop_back();
                return false;
            }
            return true;
        }
        int d = ch.a;
        set_up(d, ch.b, v);
        if (v) {
            int pd = probe_pos_[2 + d];
            if (up_assign_[d][pd] == 0) return false;
            if (up_assign_[d][pd] < 0) set_up(d, pd, 1);
            if (up_assign_[1 - d][probe_pos_[3 - d]] == 1) return false;
        }
        return true;
    }

    void set_up(int d, int i, bool v) {
        up_assign_[d][i] = v ? 1 : 0;
        trail_.push_back({d, i});
    }

    void undo(std::size_t trail, std::size_t locals) {
        while (trail_.size() > trail) {
            auto [d, i] = trail_.back();
            up_assign_[d][i] = -1;
            trail_.pop_back();
        }
        locals_.resize(locals);
    }

    // --- construction

    void construct(int l, int g1, int g2) {
        cur_name_ = l;
        succ_[0] = g1 < 0 ? -1 : groups_[g1].rep;
        succ_[1] = g2 < 0 ? -1 : groups_[g2].rep;
        search(false);
    }

    void branch(const Choice& ch, bool goal_mode) {
        for (bool v : {false, true}) {
            if (found_ >= 0) return;
            std::size_t t = trail_.size(), lc = locals_.size();
            if (assign(ch, v)) search(goal_mode);
            undo(t, lc);
        }
    }

    void search(bool goal_mode) {
        ++cur_stamp_;
        int l = cur_name_;
        if (goal_mode) {
            auto g = ev(goal_[l]);
            if (g == 0) return;
            if (g == 1) {
                admit(true, true);
                return;
            }
            branch(pick(goal_[l]), true);
            return;
        }
        bool have = false;
        Choice ch{};
        for (int r = 0; r < 2; ++r) {
            int t = succ_[r];
            if (t < 0) continue;
            const NodeType& s = types_[t];
            const Bits& known = s.upk[r];
            for (std::size_t w = 0; w < known.size(); ++w) {
                for (std::uint64_t m = known[w]; m; m &= m - 1) {
                    int i = static_cast<int>(w * 64 + __builtin_ctzll(m));
                    int body = up_body_[l][r][i];
                    auto v = ev(body);
                    if (v < 0) {
                        if (!have) {
                            ch = pick(body);
                            have = true;
                        }
                    } else if ((v == 1) != get_bit(s.upv[r], i)) {
                        return;
                    }
                }
            }
        }
        for (int r = 0; r < 2 && !have; ++r) {
            for (int i : nonconst_[l][r]) {
                int body = body_[l][r][i];
                if (ev(body) < 0) {
                    ch = pick(body);
                    have = true;
                    break;
                }
            }
        }
        if (have) {
            branch(ch, false);
            return;
        }
        bool child_mark = (succ_[0] >= 0 && types_[succ_[0]].mark) || (succ_[1] >= 0 && types_[succ_[1]].mark);
        if (child_mark) {
            admit(true, false);
            return;
        }
        auto g = ev(goal_[l]);
        if (g == 1) {
            admit(true, true);
            return;
        }
        admit(false, false);
        if (g < 0 && found_ < 0) branch(pick(goal_[l]), true);
    }

    void admit(bool mark, bool here) {
        int l = cur_name_;
        NodeType t;
        t.name = l;
        for (int r = 0; r < 2; ++r) {
            t.s[r] = base_[l][r];
            for (int i : nonconst_[l][r])
                if (ev(body_[l][r][i]) == 1) set_bit(t.s[r], i);
            t.upk[r] = zero_bits(by_prog_[2 + r].size());
            t.upv[r] = zero_bits(by_prog_[2 + r].size());
            for (std::size_t i = 0; i < up_assign_[r].size(); ++i) {
                if (up_assign_[r][i] < 0) continue;
                set_bit(t.upk[r], static_cast<int>(i));
                if (up_assign_[r][i] == 1) set_bit(t.upv[r], static_cast<int>(i));
            }
        }
        t.mark = mark;
        t.goal_here = here;
        t.succ[0] = succ_[0];
        t.succ[1] = succ_[1];
        t.round = round_;
        t.locals = locals_;

        std::string key;
        for (int r = 0; r < 2; ++r) {
            append_key(key, t.s[r]);
            append_key(key, t.upk[r]);
            append_key(key, t.upv[r]);
        }
        key += mark ? '1' : '0';
        if (!type_index_.emplace(std::move(key), static_cast<int>(types_.size())).second) return;
        if (types_.size() >= opts_.budget)
            throw ResourceLimit("node type budget of " + std::to_string(opts_.budget) + " exceeded");
        int id = static_cast<int>(types_.size());
        types_.push_back(std::move(t));
        register_groups(id);

        const NodeType& nt = types_[id];
        bool pending_up = false;
        for (int r = 0; r < 2; ++r)
            for (std::size_t w = 0; w < nt.upk[r].size(); ++w)
                if (nt.upk[r][w] & nt.upv[r][w]) pending_up = true;
        if (nt.mark && !pending_up) found_ = id;
    }

    void register_groups(int id) {
        const NodeType& t = types_[id];
        for (int r = 0; r < 2; ++r) {
            const int other = 1 - r;
            bool blocked = false;
            for (std::size_t w = 0; w < t.upk[other].size(); ++w)
                if (t.upk[other][w] & t.upv[other][w]) blocked = true;
            if (blocked) continue;
            for (std::size_t c = 0; c < class_mask_[r].size(); ++c) {
                std::string key;
                const Bits& mask = class_mask_[r][c];
                for (std::size_t w = 0; w < mask.size(); ++w) {
                    std::uint64_t v = t.s[r][w] & mask[w];
                    key.append(reinterpret_cast<const char*>(&v), sizeof v);
                }
                append_key(key, t.upk[r]);
                append_key(key, t.upv[r]);
                key += t.mark ? '1' : '0';
                auto [it, fresh] = class_index_[r][c].emplace(std::move(key), static_cast<int>(groups_.size()));
                if (fresh) {
                    groups_.push_back({id, round_});
                    class_groups_[r][c].push_back(it->second);
                }
            }
        }
    }

    void expand_round(int round) {
        for (int l = 0; l < nnames_ && found_ < 0; ++l) {
            const auto& all1 = class_groups_[0][class_of_[0][l]];
            const auto& all2 = class_groups_[1][class_of_[1][l]];
            // snapshot: only groups formed before this round take part
            auto upto = [&](const std::vector<int>& gs) {
                std::size_t n = 0;
                while (n < gs.size() && groups_[gs[n]].round < round) ++n;
                return n;
            };
            auto first_new = [&](const std::vector<int>& gs, std::size_t n) {
                std::size_t k = n;
                while (k > 0 && groups_[gs[k - 1]].round == round - 1) --k;
                return k;
            };
            std::size_t n1 = upto(all1), n2 = upto(all2);
            std::size_t f1 = first_new(all1, n1), f2 = first_new(all2, n2);
            std::vector<int> list1{-1}, list2{-1};
            for (std::size_t i = 0; i < n1; ++i) list1.push_back(all1[i]);
            for (std::size_t i = 0; i < n2; ++i) list2.push_back(all2[i]);
            // pairs with at least one group from the previous round; absent
            // successors first so witnesses stay small
            for (std::size_t i = 0; i < list1.size() && found_ < 0; ++i) {
                std::size_t from = i > f1 ? 0 : f2 + 1;
                for (std::size_t j = from; j < list2.size() && found_ < 0; ++j) construct(l, list1[i], list2[j]);
            }
        }
    }

    // --- witness

    int build_node(int tid, BinaryTree& t) {
        const NodeType& nt = types_[tid];
        int id = t.add(c_.names[nt.name]);
        const auto& model = sat_.solve(nt.locals);
        if (!model) throw std::logic_error("inconsistent local constraints in admitted node type");
        int np = static_cast<int>(c_.props.size());
        for (int a = 0; a < c_.natoms(); ++a) {
            if (!(*model)[a]) continue;
            if (a < np) t.nodes[id].props.insert(c_.props[a]);
            else t.nodes[id].attrs.insert(c_.attrs[a - np]);
        }
        if (nt.succ[0] >= 0) t.set_child1(id, build_node(nt.succ[0], t));
        if (nt.succ[1] >= 0) t.set_child2(id, build_node(nt.succ[1], t));
        return id;
    }

    void build_witness(int root, SatResult& res) {
        res.witness = BinaryTree{};
        build_node(root, res.witness);
        // follow the marks down to the node where the goal was established
        int tid = root, node = 0;
        while (!types_[tid].goal_here) {
            const NodeType& nt = types_[tid];
            int next = (nt.succ[0] >= 0 && types_[nt.succ[0]].mark) ? 0 : 1;
            node = next == 0 ? res.witness.nodes[node].child1 : res.witness.nodes[node].child2;
            tid = nt.succ[next];
        }
        res.target = node;
    }

    Compiled& c_;
    Dag& d_;
    const SolverOptions& opts_;
    LocalSat sat_;

    int nnames_ = 0;
    std::vector<int> by_prog_[4];
    std::vector<int> pos_;
    int probe_pos_[4] = {-1, -1, -1, -1};

    std::vector<std::array<std::vector<int>, 2>> body_;
    std::vector<std::array<std::vector<int>, 2>> up_body_;
    std::vector<std::array<std::vector<int>, 2>> nonconst_;
    std::vector<std::array<Bits, 2>> base_;
    std::vector<int> goal_;
    std::unordered_map<std::uint64_t, int> spec_memo_;
    std::unordered_map<int, int> fold_memo_;

    std::vector<int> class_of_[2];
    std::vector<Bits> class_mask_[2];
    std::vector<std::vector<int>> class_groups_[2];
    std::vector<std::unordered_map<std::string, int>> class_index_[2];

    std::vector<NodeType> types_;
    std::unordered_map<std::string, int> type_index_;
    std::vector<Group> groups_;
    int round_ = 0;
    int found_ = -1;

    // construction state
    int cur_name_ = 0;
    int succ_[2] = {-1, -1};
    std::vector<std::int8_t> up_assign_[2];
    std::vector<std::pair<int, int>> trail_;
    LocalSat::Constraints locals_;
    std::vector<std::uint32_t> stamp_;
    std::vector<std::int8_t> val_;
    std::uint32_t cur_stamp_ = 0;
};

void reject_placeholders(const FormulaPtr& f) {
    if (f->kind == FormulaKind::Call) {
        if (f->name == "__absent") throw UnresolvedPlaceholder("attribute placeholder left unresolved before solving");
        throw Error("predicate call '" + f->name + "' reached the solver unexpanded");
    }
    for (const auto& k : f->kids) reject_placeholders(k);
    for (const auto& b : f->bindings) reject_placeholders(b.body);
}

}  // namespace

Lean compute_lean(const FormulaPtr& f) {
    reject_placeholders(f);
    FormulaPtr nnf = normalize(f);
    Compiled c;
    Compiler(c).run(nnf);
    Lean lean;
    lean.names = c.names;
    lean.props = c.props;
    lean.attributes = c.attrs;
    for (const auto& e : c.entries)
        lean.modalities.push_back("<" + to_string(static_cast<Program>(e.prog)) + ">#" + std::to_string(e.body));
    return lean;
}

SatResult satisfiable(const FormulaPtr& f, const SolverOptions& opts) {
    reject_placeholders(f);
    FormulaPtr nnf = normalize(f);
    check_cycle_free(nnf);
    Compiled c;
    Compiler(c).run(nnf);
    Saturation s(c, opts);
    SatResult res = s.run();
    if (res.sat && opts.verify && !check_model(f, res.witness, res.target))
        throw std::logic_error("witness does not satisfy the formula: " + to_string(f));
    return res;
}

}  // namespace treesat
