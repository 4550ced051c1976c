#include "slog/runtime.hpp"

#include <algorithm>
#include <barrier>
#include <chrono>
#include <exception>
#include <functional>
#include <thread>

#include <absl/container/btree_set.h>
#include <absl/container/inlined_vector.h>

#include "slog/builtins.hpp"

namespace slog {

uint32_t bucket_of(const IndexSpec& index, std::span<const Value> ordered, uint32_t bucket_count) {
    return static_cast<uint32_t>(hash_values(ordered.first(index.key_len), kBucketSeed) & (bucket_count - 1));
}

uint32_t subbucket_of(const IndexSpec& index, std::span<const Value> ordered, uint32_t subbuckets) {
    if (subbuckets <= 1) return 0;
    return static_cast<uint32_t>(hash_values(ordered.subspan(index.key_len), kSubbucketSeed) % subbuckets);
}

namespace {

using Clock = std::chrono::steady_clock;
using TupleSet = absl::btree_set<Tuple>;
using Env = absl::InlinedVector<Value, 8>;

struct Shard {
    TupleSet total, delta, next;
};

struct BucketSlot {
    uint32_t subcount = 1;
    absl::InlinedVector<std::unique_ptr<Shard>, 1> subs = decltype(subs)(1);
};

struct IndexStore {
    const IndexSpec* spec = nullptr;
    bool canonical = false;
    std::vector<BucketSlot> buckets;
    std::vector<uint32_t> delta_buckets;  // sorted
    std::vector<uint32_t> total_buckets;  // sorted
    std::vector<char> has_total;
};

struct ShardRef {
    uint32_t index, bucket, sub;
    Shard* shard;
};

// ----- compiled rules ------------------------------------------------------

struct ETerm {
    PTerm::Kind kind = PTerm::Kind::Ignore;
    uint32_t slot = 0;
    Value lit;
};

// One step of matching a stored tuple (in index order) against a clause.
struct BindStep {
    enum Op : uint8_t { Bind, CheckSlot, CheckLit } op;
    uint32_t pos;
    uint32_t slot;
    Value lit;
};

struct EAtom {
    RelId rel;
    uint32_t index;
    std::vector<ETerm> cols;  // original column order
};

struct EFilter {
    ClauseKind kind;
    BuiltinId builtin;
    uint32_t index = 0;
    uint32_t probe_len = 0;
    std::vector<ETerm> args;
};

struct EHead {
    RelId rel;
    bool intermediate;
    std::optional<RelId> db_rel;
    std::vector<ETerm> args;
};

struct ERule {
    std::vector<EAtom> body;
    std::vector<EFilter> filters;
    std::vector<EHead> heads;
    uint32_t nslots = 0;
    // bind[o] matches body[o] as outer clause; probe[o] matches the other
    // clause as inner once body[o] is bound.
    std::vector<BindStep> bind[2], probe[2];
};

std::vector<BindStep> bind_program(const EAtom& atom, const IndexSpec& ix, std::vector<char>& seen) {
    std::vector<BindStep> steps;
    for (uint32_t i = 0; i < ix.order.size(); ++i) {
        const ETerm& t = atom.cols[ix.order[i]];
        if (t.kind == PTerm::Kind::Lit) {
            steps.push_back({BindStep::CheckLit, i, 0, t.lit});
        } else if (t.kind == PTerm::Kind::Var) {
            steps.push_back({seen[t.slot] ? BindStep::CheckSlot : BindStep::Bind, i, t.slot, {}});
            seen[t.slot] = 1;
        }
    }
    return steps;
}

inline bool apply_steps(const std::vector<BindStep>& steps, const Tuple& t, Env& env) {
    for (const auto& s : steps) {
        switch (s.op) {
            case BindStep::Bind: env[s.slot] = t[s.pos]; break;
            case BindStep::CheckSlot:
                if (!(env[s.slot] == t[s.pos])) return false;
                break;
            case BindStep::CheckLit:
                if (!(s.lit == t[s.pos])) return false;
                break;
        }
    }
    return true;
}

struct VOps {
    static std::optional<int64_t> as_int(const Value& v) {
        if (v.is_int()) return v.as_int();
        return std::nullopt;
    }
    static Value make_int(int64_t i) { return Value::integer(i); }
};

struct Job {
    uint32_t rule;
    uint32_t pos;
    Env env;  // slots, then one key per head
};

struct AdminMsg {
    uint32_t index, bucket, sub;
    Tuple tuple;
};

struct GatherTask {
    const RuleVariant* variant;
    uint32_t outer;  // body position of the outer clause
    uint32_t bucket;
    std::vector<uint32_t> subs;  // owned inner subbuckets
    std::vector<const Tuple*> tuples;
};

struct Worker {
    std::vector<std::vector<Job>> out;         // per destination
    std::vector<std::vector<AdminMsg>> admin;  // per destination
    std::vector<Job> inbox;
    std::vector<GatherTask> tasks;
    std::vector<ShardRef> hot;        // shards with a non-empty `next`
    std::vector<ShardRef> deltas;     // shards with a non-empty `delta`
    std::vector<std::pair<uint32_t, uint32_t>> new_totals;  // (index, bucket)
    std::vector<size_t> counts;       // canonical tuples per relation
    size_t derived = 0;
    std::exception_ptr error;
};

// Fixed set of threads that run one function per worker, then wait.
class Pool {
public:
    explicit Pool(uint32_t n) : n_(n), start_(n + 1), done_(n + 1) {
        if (n_ == 1) return;
        for (uint32_t w = 0; w < n_; ++w)
            threads_.emplace_back([this, w] {
                while (true) {
                    start_.arrive_and_wait();
                    if (stop_) return;
                    (*task_)(w);
                    done_.arrive_and_wait();
                }
            });
    }
    ~Pool() {
        if (n_ == 1) return;
        stop_ = true;
        start_.arrive_and_wait();
        for (auto& t : threads_) t.join();
    }
    void run(const std::function<void(uint32_t)>& f) {
        if (n_ == 1) {
            f(0);
            return;
        }
        task_ = &f;
        start_.arrive_and_wait();
        done_.arrive_and_wait();
    }

private:
    uint32_t n_;
    std::barrier<> start_, done_;
    std::vector<std::thread> threads_;
    const std::function<void(uint32_t)>* task_ = nullptr;
    bool stop_ = false;
};

}  // namespace

struct Runtime::Impl {
    const Plan& plan;
    Database& db;
    RuntimeConfig cfg;
    uint32_t W, B;
    std::vector<IndexStore> stores;
    std::vector<ERule> rules;
    std::vector<std::optional<RelId>> db_rel;  // plan relation -> database relation
    std::vector<Worker> workers;
    Pool pool;
    std::vector<uint32_t> touched_delta_indices;

    Impl(const Plan& p, Database& d, RuntimeConfig c)
        : plan(p), db(d), cfg(c), W(c.workers), B(d.bucket_count()), workers(c.workers), pool(c.workers) {
        if (W == 0) throw std::invalid_argument("worker count must be at least 1");
        stores.resize(plan.indices.size());
        for (size_t i = 0; i < plan.indices.size(); ++i) {
            stores[i].spec = &plan.indices[i];
            stores[i].canonical = plan.indices[i].canonical;
            stores[i].buckets.resize(B);
            stores[i].has_total.assign(B, 0);
        }
        for (const auto& rel : plan.relations)
            db_rel.push_back(rel.intermediate ? std::nullopt : std::optional<RelId>(db.declare(rel.tag, rel.arity)));
        for (auto& w : workers) {
            w.out.resize(W);
            w.admin.resize(W);
            w.counts.assign(plan.relations.size(), 0);
        }
        for (const auto& br : plan.rules) rules.push_back(compile(br));
    }

    ETerm term(const PTerm& t) {
        ETerm e{t.kind, t.slot, {}};
        if (t.kind == PTerm::Kind::Lit) e.lit = db.literal_value(t.lit);
        return e;
    }

    ERule compile(const BinaryRule& br) {
        ERule r;
        r.nslots = static_cast<uint32_t>(br.slots.size());
        for (const auto& a : br.body) {
            EAtom ea{a.rel, a.index, {}};
            for (const auto& t : a.cols) ea.cols.push_back(term(t));
            r.body.push_back(std::move(ea));
        }
        for (const auto& f : br.filters) {
            EFilter ef{f.kind, f.builtin, f.index, f.probe_len, {}};
            for (const auto& t : f.args) ef.args.push_back(term(t));
            r.filters.push_back(std::move(ef));
        }
        for (const auto& h : br.heads) {
            EHead eh{h.rel, plan.relations[h.rel].intermediate, db_rel.at(h.rel), {}};
            for (const auto& t : h.args) eh.args.push_back(term(t));
            r.heads.push_back(std::move(eh));
        }
        for (uint32_t o = 0; o < r.body.size(); ++o) {
            std::vector<char> seen(r.nslots, 0);
            r.bind[o] = bind_program(r.body[o], plan.indices[r.body[o].index], seen);
            if (r.body.size() == 2) {
                const EAtom& inner = r.body[1 - o];
                r.probe[o] = bind_program(inner, plan.indices[inner.index], seen);
            }
        }
        return r;
    }

    // ----- storage ---------------------------------------------------------

    Shard& shard(uint32_t index, uint32_t b, uint32_t s) {
        auto& slot = stores[index].buckets[b].subs[s];
        if (!slot) slot = std::make_unique<Shard>();
        return *slot;
    }

    const Shard* find_shard(uint32_t index, uint32_t b, uint32_t s) const {
        const auto& bs = stores[index].buckets[b];
        return s < bs.subs.size() ? bs.subs[s].get() : nullptr;
    }

    static Tuple permute(const IndexSpec& ix, std::span<const Value> orig) {
        Tuple t;
        t.reserve(ix.order.size());
        for (uint32_t c : ix.order) t.push_back(orig[c]);
        return t;
    }

    std::pair<uint32_t, uint32_t> place(uint32_t index, const Tuple& ordered) const {
        const auto& ix = plan.indices[index];
        uint32_t b = bucket_of(ix, ordered, B);
        return {b, subbucket_of(ix, ordered, stores[index].buckets[b].subcount)};
    }

    void load_database() {
        absl::flat_hash_map<RelId, RelId> by_db;
        for (RelId r = 0; r < plan.relations.size(); ++r)
            if (db_rel[r]) by_db[*db_rel[r]] = r;
        db.for_each_fact([&](InternKey key, const FactIdentity& f) {
            auto it = by_db.find(f.rel);
            if (it == by_db.end()) return;
            RelId r = it->second;
            Tuple orig;
            orig.push_back(Value::fact(key));
            orig.insert(orig.end(), f.args.begin(), f.args.end());
            for (uint32_t ix : plan.relations[r].indices) {
                Tuple t = permute(plan.indices[ix], orig);
                auto [b, s] = place(ix, t);
                if (shard(ix, b, s).total.insert(std::move(t)).second && ix == plan.relations[r].canonical_index)
                    ++workers[0].counts[r];
                mark_total(ix, b);
            }
        });
        for (auto& s : stores) std::sort(s.total_buckets.begin(), s.total_buckets.end());
    }

    void mark_total(uint32_t index, uint32_t b) {
        auto& s = stores[index];
        if (!s.has_total[b]) {
            s.has_total[b] = 1;
            s.total_buckets.push_back(b);
        }
    }

    size_t count(RelId r) const {
        size_t n = 0;
        for (const auto& w : workers) n += w.counts[r];
        return n;
    }

    // ----- phases ----------------------------------------------------------

    const TupleSet* version(const Shard* s, Version v) const {
        if (!s) return nullptr;
        return v == Version::Delta ? &s->delta : &s->total;
    }

    const std::vector<uint32_t>& version_buckets(uint32_t index, Version v) const {
        return v == Version::Delta ? stores[index].delta_buckets : stores[index].total_buckets;
    }

    void gather(uint32_t w, const std::vector<RuleVariant>& variants) {
        auto& tasks = workers[w].tasks;
        tasks.clear();
        for (const auto& v : variants) {
            const ERule& r = rules[v.rule];
            if (r.body.size() == 0) {
                if (w == 0) tasks.push_back({&v, 0, 0, {}, {}});
                continue;
            }
            // The delta side drives the join.
            uint32_t outer = r.body.size() == 2 && v.v[0] == Version::Total && v.v[1] == Version::Delta ? 1 : 0;
            uint32_t oix = r.body[outer].index;
            for (uint32_t b : version_buckets(oix, v.v[outer])) {
                if (r.body.size() == 1) {
                    if (owner_of(b, 0, W) == w) tasks.push_back({&v, outer, b, {0}, {}});
                    continue;
                }
                uint32_t inner = 1 - outer;
                uint32_t iix = r.body[inner].index;
                GatherTask task{&v, outer, b, {}, {}};
                const auto& slot = stores[iix].buckets[b];
                for (uint32_t s = 0; s < slot.subcount; ++s) {
                    if (owner_of(b, s, W) != w) continue;
                    const TupleSet* set = version(find_shard(iix, b, s), v.v[inner]);
                    if (set && !set->empty()) task.subs.push_back(s);
                }
                if (task.subs.empty()) continue;
                // Every inner subbucket sees the whole outer bucket.
                const auto& oslot = stores[oix].buckets[b];
                for (uint32_t s = 0; s < oslot.subcount; ++s)
                    if (const TupleSet* set = version(find_shard(oix, b, s), v.v[outer]))
                        for (const auto& t : *set) task.tuples.push_back(&t);
                tasks.push_back(std::move(task));
            }
        }
    }

    bool probe_absent(const EFilter& f, const Env& env) const {
        const auto& ix = plan.indices[f.index];
        Tuple prefix;
        for (uint32_t i = 0; i < f.probe_len; ++i) {
            const ETerm& t = f.args[ix.order[i] - 1];
            prefix.push_back(t.kind == PTerm::Kind::Lit ? t.lit : env[t.slot]);
        }
        uint32_t b = static_cast<uint32_t>(hash_values(prefix, kBucketSeed) & (B - 1));
        const auto& slot = stores[f.index].buckets[b];
        for (uint32_t s = 0; s < slot.subcount; ++s) {
            const Shard* sh = find_shard(f.index, b, s);
            if (!sh) continue;
            for (const TupleSet* set : {&sh->total, &sh->delta}) {
                auto it = set->lower_bound(prefix);
                if (it != set->end() && std::equal(prefix.begin(), prefix.end(), it->begin())) return false;
            }
        }
        return true;
    }

    bool run_filters(const ERule& r, Env& env) const {
        for (const auto& f : r.filters) {
            if (f.kind == ClauseKind::Neg) {
                if (!probe_absent(f, env)) return false;
                continue;
            }
            Value vals[3];
            uint32_t mask = 0;
            // Outputs are the variable slots not yet written; the planner
            // guarantees inputs are bound, and marks outputs by position.
            for (size_t k = 0; k < f.args.size(); ++k) {
                const ETerm& t = f.args[k];
                if (t.kind == PTerm::Kind::Lit) {
                    vals[k] = t.lit;
                    mask |= 1u << k;
                } else if (!(env[t.slot] == Value::lowest())) {
                    vals[k] = env[t.slot];
                    mask |= 1u << k;
                }
            }
            if (!eval_builtin<VOps>(f.builtin, std::span<Value>(vals, f.args.size()), mask)) return false;
            for (size_t k = 0; k < f.args.size(); ++k)
                if (!(mask >> k & 1u)) env[f.args[k].slot] = vals[k];
        }
        return true;
    }

    Tuple head_args(const ERule& r, uint32_t pos, const Env& env) const {
        Tuple args;
        for (const auto& t : r.heads[pos].args) {
            switch (t.kind) {
                case PTerm::Kind::Lit: args.push_back(t.lit); break;
                case PTerm::Kind::Var: args.push_back(env[t.slot]); break;
                case PTerm::Kind::HeadRef: args.push_back(env[r.nslots + t.slot]); break;
                case PTerm::Kind::Ignore: args.push_back(Value::lowest()); break;
            }
        }
        return args;
    }

    void emit(uint32_t w, uint32_t rule, Env env) {
        const ERule& r = rules[rule];
        if (!run_filters(r, env)) return;
        Tuple args = head_args(r, 0, env);
        uint32_t b = static_cast<uint32_t>(hash_values(args, kBucketSeed) & (B - 1));
        workers[w].out[owner_of(b, 0, W)].push_back(Job{rule, 0, std::move(env)});
    }

    Env fresh_env(const ERule& r) const { return Env(r.nslots + r.heads.size(), Value::lowest()); }

    void join(uint32_t w) {
        for (auto& task : workers[w].tasks) {
            const RuleVariant& v = *task.variant;
            const ERule& r = rules[v.rule];
            if (r.body.empty()) {
                emit(w, v.rule, fresh_env(r));
                continue;
            }
            if (r.body.size() == 1) {
                const TupleSet* set = version(find_shard(r.body[0].index, task.bucket, 0), v.v[0]);
                if (!set) continue;
                for (const auto& t : *set) {
                    Env env = fresh_env(r);
                    if (apply_steps(r.bind[0], t, env)) emit(w, v.rule, std::move(env));
                }
                continue;
            }
            uint32_t inner = 1 - task.outer;
            const EAtom& ia = r.body[inner];
            uint32_t key_len = plan.indices[ia.index].key_len;
            for (uint32_t s : task.subs) {
                const TupleSet* set = version(find_shard(ia.index, task.bucket, s), v.v[inner]);
                for (const Tuple* ot : task.tuples) {
                    Env env = fresh_env(r);
                    if (!apply_steps(r.bind[task.outer], *ot, env)) continue;
                    Tuple prefix(ot->begin(), ot->begin() + key_len);
                    for (auto it = set->lower_bound(prefix); it != set->end(); ++it) {
                        if (!std::equal(prefix.begin(), prefix.end(), it->begin())) break;
                        Env e2 = env;
                        if (apply_steps(r.probe[task.outer], *it, e2)) emit(w, v.rule, std::move(e2));
                    }
                }
            }
        }
    }

    void exchange(uint32_t w) {
        auto& in = workers[w].inbox;
        in.clear();
        for (auto& src : workers) {
            auto& box = src.out[w];
            std::move(box.begin(), box.end(), std::back_inserter(in));
            box.clear();
        }
    }

    void note_hot(Worker& wk, uint32_t index, uint32_t b, uint32_t s, Shard& sh) {
        if (sh.next.size() == 1) wk.hot.push_back({index, b, s, &sh});
    }

    void intern(uint32_t w) {
        Worker& wk = workers[w];
        for (auto& job : wk.inbox) {
            const ERule& r = rules[job.rule];
            const EHead& h = r.heads[job.pos];
            Tuple args = head_args(r, job.pos, job.env);
            uint32_t b = static_cast<uint32_t>(hash_values(args, kBucketSeed) & (B - 1));
            Value key = Value::lowest();
            if (h.db_rel) key = Value::fact(db.bucket(b).intern(b, *h.db_rel, args).key);
            job.env[r.nslots + job.pos] = key;

            Tuple orig;
            orig.push_back(key);
            orig.insert(orig.end(), args.begin(), args.end());
            const auto& rel = plan.relations[h.rel];
            uint32_t cix = rel.canonical_index;
            Tuple ct = permute(plan.indices[cix], orig);
            Shard& sh = shard(cix, b, 0);
            if (!sh.total.contains(ct) && !sh.delta.contains(ct)) {
                auto [it, fresh] = sh.next.insert(std::move(ct));
                if (fresh) {
                    note_hot(wk, cix, b, 0, sh);
                    ++wk.counts[h.rel];
                    ++wk.derived;
                    for (uint32_t ix : rel.indices) {
                        if (ix == cix) continue;
                        Tuple t = permute(plan.indices[ix], orig);
                        auto [ab, as] = place(ix, t);
                        wk.admin[owner_of(ab, as, W)].push_back({ix, ab, as, std::move(t)});
                    }
                }
            }
            if (job.pos + 1 < r.heads.size()) {
                ++job.pos;
                Tuple next_args = head_args(r, job.pos, job.env);
                uint32_t nb = static_cast<uint32_t>(hash_values(next_args, kBucketSeed) & (B - 1));
                wk.out[owner_of(nb, 0, W)].push_back(std::move(job));
            }
        }
        wk.inbox.clear();
    }

    void admin(uint32_t w) {
        Worker& wk = workers[w];
        for (auto& src : workers) {
            for (auto& m : src.admin[w]) {
                Shard& sh = shard(m.index, m.bucket, m.sub);
                if (sh.next.insert(std::move(m.tuple)).second) note_hot(wk, m.index, m.bucket, m.sub, sh);
            }
            src.admin[w].clear();
        }
    }

    void advance(uint32_t w) {
        Worker& wk = workers[w];
        wk.new_totals.clear();
        for (auto& ref : wk.deltas) {
            ref.shard->total.merge(ref.shard->delta);
            ref.shard->delta.clear();
            wk.new_totals.push_back({ref.index, ref.bucket});
        }
        wk.deltas.clear();
        for (auto& ref : wk.hot) {
            std::swap(ref.shard->delta, ref.shard->next);
            if (!ref.shard->delta.empty()) wk.deltas.push_back(ref);
        }
        wk.hot.clear();
    }

    // Rebuilds bucket lists after advance; returns the number of delta tuples.
    size_t publish() {
        for (uint32_t ix : touched_delta_indices) stores[ix].delta_buckets.clear();
        touched_delta_indices.clear();
        size_t deltas = 0;
        std::vector<uint32_t> grew;
        for (auto& wk : workers) {
            for (auto [ix, b] : wk.new_totals)
                if (!stores[ix].has_total[b]) {
                    mark_total(ix, b);
                    grew.push_back(ix);
                }
            for (const auto& ref : wk.deltas) {
                auto& s = stores[ref.index];
                if (s.delta_buckets.empty()) touched_delta_indices.push_back(ref.index);
                s.delta_buckets.push_back(ref.bucket);
                deltas += ref.shard->delta.size();
            }
        }
        std::sort(grew.begin(), grew.end());
        grew.erase(std::unique(grew.begin(), grew.end()), grew.end());
        for (uint32_t ix : grew) std::sort(stores[ix].total_buckets.begin(), stores[ix].total_buckets.end());
        for (uint32_t ix : touched_delta_indices) {
            auto& d = stores[ix].delta_buckets;
            std::sort(d.begin(), d.end());
            d.erase(std::unique(d.begin(), d.end()), d.end());
        }
        return deltas;
    }

    // Doubles the subbucket count of buckets holding more than rho times the
    // mean bucket size. Existing tuples stay where they are.
    void refine() {
        for (uint32_t ix : touched_delta_indices) {
            auto& s = stores[ix];
            if (s.canonical || s.total_buckets.size() < 2) continue;
            std::vector<size_t> sizes;
            size_t sum = 0;
            for (uint32_t b : s.total_buckets) {
                size_t n = 0;
                for (const auto& sh : s.buckets[b].subs)
                    if (sh) n += sh->total.size() + sh->delta.size();
                sizes.push_back(n);
                sum += n;
            }
            double mean = static_cast<double>(sum) / static_cast<double>(s.total_buckets.size());
            for (size_t i = 0; i < sizes.size(); ++i) {
                auto& slot = s.buckets[s.total_buckets[i]];
                if (static_cast<double>(sizes[i]) > cfg.rho * mean && slot.subcount < cfg.max_subbuckets) {
                    slot.subcount = std::min(slot.subcount * 2, cfg.max_subbuckets);
                    slot.subs.resize(slot.subcount);
                }
            }
        }
    }

    template <typename F>
    double timed(F&& f) {
        auto t0 = Clock::now();
        std::function<void(uint32_t)> task = [&](uint32_t w) {
            try {
                f(w);
            } catch (...) {
                workers[w].error = std::current_exception();
            }
        };
        pool.run(task);
        for (auto& wk : workers)
            if (wk.error) {
                auto e = wk.error;
                wk.error = nullptr;
                std::rethrow_exception(e);
            }
        return std::chrono::duration<double>(Clock::now() - t0).count();
    }

    // One superstep; returns the number of delta tuples afterwards.
    size_t superstep(const std::vector<RuleVariant>& variants, RunStats& st) {
        st.times.gather += timed([&](uint32_t w) { gather(w, variants); });
        st.times.join += timed([&](uint32_t w) { join(w); });
        while (true) {
            st.times.exchange += timed([&](uint32_t w) { exchange(w); });
            bool any = std::any_of(workers.begin(), workers.end(), [](const Worker& wk) { return !wk.inbox.empty(); });
            if (!any) break;
            st.times.intern += timed([&](uint32_t w) { intern(w); });
        }
        st.times.exchange += timed([&](uint32_t w) { admin(w); });
        st.times.advance += timed([&](uint32_t w) { advance(w); });
        auto t0 = Clock::now();
        size_t deltas = publish();
        refine();
        st.times.advance += std::chrono::duration<double>(Clock::now() - t0).count();
        ++st.supersteps;
        return deltas;
    }

    RunStats run() {
        RunStats st;
        std::vector<std::vector<size_t>> seen(plan.sccs.size());
        std::vector<bool> ran(plan.sccs.size(), false);
        st.sccs.resize(plan.sccs.size());
        auto snapshot = [&](const PlanScc& scc) {
            std::vector<size_t> counts;
            for (RelId r : scc.reads) counts.push_back(count(r));
            return counts;
        };
        auto total_facts = [&] {
            size_t n = 0;
            for (RelId r = 0; r < plan.relations.size(); ++r) n += count(r);
            return n;
        };
        for (bool dirty = true; dirty;) {
            dirty = false;
            ++st.passes;
            for (size_t i = 0; i < plan.sccs.size(); ++i) {
                const PlanScc& scc = plan.sccs[i];
                if (ran[i] && seen[i] == snapshot(scc)) continue;
                st.sccs[i].scc = i;
                ++st.sccs[i].runs;
                size_t before = total_facts();
                const auto* variants = &scc.seed;
                while (true) {
                    if (st.supersteps >= cfg.fuel) {
                        st.fuel_exhausted = true;
                        finish(st);
                        return st;
                    }
                    ++st.sccs[i].supersteps;
                    if (superstep(*variants, st) == 0) break;
                    variants = &scc.delta;
                }
                ran[i] = true;
                seen[i] = snapshot(scc);
                if (total_facts() != before) dirty = true;
            }
        }
        finish(st);
        return st;
    }

    void finish(RunStats& st) {
        for (const auto& wk : workers) st.derived += wk.derived;
    }

    // ----- checks ----------------------------------------------------------

    std::optional<std::string> verify() const {
        for (uint32_t ix = 0; ix < stores.size(); ++ix) {
            const auto& s = stores[ix];
            const auto& spec = plan.indices[ix];
            const auto& rel = plan.relations[spec.rel];
            std::string where = rel.tag + "/" + std::to_string(rel.arity) + " index " + std::to_string(ix);
            size_t n = 0;
            for (uint32_t b = 0; b < B; ++b) {
                const auto& slot = s.buckets[b];
                if (s.canonical && slot.subcount != 1) return where + ": canonical bucket split";
                for (uint32_t sub = 0; sub < slot.subs.size(); ++sub) {
                    const Shard* sh = slot.subs[sub].get();
                    if (!sh) continue;
                    if (!sh->next.empty()) return where + ": pending tuples outside a superstep";
                    for (const auto& t : sh->delta)
                        if (sh->total.contains(t)) return where + ": tuple in both delta and total";
                    for (const TupleSet* set : {&sh->total, &sh->delta})
                        for (const auto& t : *set) {
                            ++n;
                            if (bucket_of(spec, t, B) != b) return where + ": tuple stored outside its bucket";
                            if (!s.canonical || rel.intermediate) continue;
                            Value key = t[spec.order.size() - 1];
                            const FactIdentity* f = key.is_fact() ? db.try_resolve(InternKey{key.bits()}) : nullptr;
                            if (!f || f->rel != *db_rel[spec.rel] ||
                                !std::equal(f->args.begin(), f->args.end(), t.begin(), t.begin() + rel.arity))
                                return where + ": key does not resolve to the stored tuple";
                            if (key.is_fact() && InternKey{key.bits()}.bucket() != b)
                                return where + ": key allocated outside the canonical bucket";
                        }
                }
            }
            size_t canon = 0;
            const auto& cs = stores[rel.canonical_index];
            for (const auto& slot : cs.buckets)
                for (const auto& sh : slot.subs)
                    if (sh) canon += sh->total.size() + sh->delta.size();
            if (n != canon) return where + ": index holds a different number of tuples than the canonical index";
            if (s.canonical && db_rel[spec.rel] && db.facts_of(*db_rel[spec.rel]).size() != canon)
                return where + ": interned facts missing from storage";
        }
        return std::nullopt;
    }
};

Runtime::Runtime(const Plan& plan, Database& db, RuntimeConfig cfg) : impl_(std::make_unique<Impl>(plan, db, cfg)) {}
Runtime::~Runtime() = default;
void Runtime::load_database() { impl_->load_database(); }
RunStats Runtime::run() { return impl_->run(); }
std::optional<std::string> Runtime::verify_storage() const { return impl_->verify(); }
size_t Runtime::stored(RelId plan_rel) const { return impl_->count(plan_rel); }
uint32_t Runtime::subbuckets(uint32_t index, uint32_t bucket) const {
    return impl_->stores.at(index).buckets.at(bucket).subcount;
}

}  // namespace slog
