#pragma once

#include <exception>
#include <thread>
#include <unordered_map>

#include "filter.hpp"
#include "partition.hpp"
#include "wire.hpp"

namespace chebfilter {

enum class CommMode { vector, pipelined };

// One worker's slice: contiguous matrix rows with remapped column indices
// (local columns < local_n reference owned rows, the rest reference halo
// slots in plan order) and local panels of U, W, X with the halo region
// appended after the local rows.
struct WorkerShard {
    std::size_t id = 0;
    std::size_t row_begin = 0, row_end = 0;
    std::size_t local_n = 0;
    std::size_t halo_n = 0;
    SparseMatrixCRS local;                   // local_n rows
    std::vector<std::size_t> halo_global;    // global row of each halo slot

    struct NeighborRows {
        std::size_t neighbor;
        std::vector<std::size_t> rows;  // local row / halo slot indices, in plan order
    };
    std::vector<NeighborRows> send_plan;  // local rows to gather per neighbor
    std::vector<NeighborRows> recv_plan;  // halo slots to scatter per neighbor

    BlockVector U, W, X;  // (local_n + halo_n) x n_s, panel width n_b

    std::vector<std::uint8_t> exchange_pending;  // per panel
};

inline std::vector<WorkerShard> shard_and_distribute(const SparseMatrixCRS& H,
                                                     const BlockVector& Xglobal,
                                                     const PartitionPlan& plan) {
    if (plan.row_ranges.empty() || plan.row_ranges.back().second != H.n)
        throw std::invalid_argument("partition plan does not match matrix");
    if (Xglobal.rows() != H.n) throw std::invalid_argument("block vector does not match matrix");
    std::vector<WorkerShard> shards(plan.worker_count);
    for (std::size_t w = 0; w < plan.worker_count; ++w) {
        WorkerShard& sh = shards[w];
        sh.id = w;
        sh.row_begin = plan.row_ranges[w].first;
        sh.row_end = plan.row_ranges[w].second;
        sh.local_n = sh.row_end - sh.row_begin;

        // Halo slots: neighbors ascending, rows in plan (sorted) order.
        std::unordered_map<std::size_t, std::size_t> slot_of;
        for (const auto& [nbr, rows] : plan.halo_in[w]) {
            WorkerShard::NeighborRows rp{nbr, {}};
            for (std::size_t g : rows) {
                std::size_t slot = sh.halo_global.size();
                sh.halo_global.push_back(g);
                slot_of[g] = slot;
                rp.rows.push_back(sh.local_n + slot);
            }
            sh.recv_plan.push_back(std::move(rp));
        }
        sh.halo_n = sh.halo_global.size();
        for (const auto& [nbr, rows] : plan.halo_out[w]) {
            WorkerShard::NeighborRows sp{nbr, {}};
            for (std::size_t g : rows) sp.rows.push_back(g - sh.row_begin);
            sh.send_plan.push_back(std::move(sp));
        }

        // Local CRS slice with remapped columns.
        sh.local.n = sh.local_n;
        sh.local.symmetry = H.symmetry;
        sh.local.row_ptr.assign(1, 0);
        for (std::size_t i = sh.row_begin; i < sh.row_end; ++i) {
            for (std::size_t k = H.row_ptr[i]; k < H.row_ptr[i + 1]; ++k) {
                std::size_t c = static_cast<std::size_t>(H.col_idx[k]);
                std::size_t lc = (c >= sh.row_begin && c < sh.row_end)
                                     ? c - sh.row_begin
                                     : sh.local_n + slot_of.at(c);
                sh.local.col_idx.push_back(static_cast<std::int32_t>(lc));
                sh.local.values.push_back(H.values[k]);
            }
            sh.local.row_ptr.push_back(sh.local.col_idx.size());
        }

        std::size_t rows = sh.local_n + sh.halo_n;
        sh.U = BlockVector(rows, Xglobal.cols(), Xglobal.block_width());
        sh.W = BlockVector(rows, Xglobal.cols(), Xglobal.block_width());
        sh.X = BlockVector(rows, Xglobal.cols(), Xglobal.block_width());
        for (std::size_t j = 0; j < Xglobal.cols(); ++j)
            for (std::size_t i = 0; i < sh.local_n; ++i)
                sh.X(i, j) = Xglobal(sh.row_begin + i, j);
        sh.exchange_pending.assign(Xglobal.panel_count(), 0);
    }
    return shards;
}

enum class ExchangePhase { init, finalize };

struct ProtocolError : std::logic_error {
    using std::logic_error::logic_error;
};

// Nonblocking halo exchange of one panel. init gathers the owned boundary
// rows and posts one frame per neighbor; finalize blocks on the matching
// frames and scatters them into the halo slots. init must precede finalize
// and at most one exchange per panel may be outstanding.
inline void halo_exchange(WorkerShard& shard, BlockVector& vec, std::size_t b,
                          ExchangePhase phase, Transport& transport, std::uint16_t degree_tag) {
    if (b >= shard.exchange_pending.size()) throw std::invalid_argument("panel index out of range");
    const std::size_t nb = vec.block_width();
    if (phase == ExchangePhase::init) {
        if (shard.exchange_pending[b])
            throw ProtocolError("halo_exchange: exchange already outstanding on panel");
        shard.exchange_pending[b] = 1;
        SubblockView panel(vec, b);
        for (const auto& sp : shard.send_plan) {
            Frame f;
            f.tag = {degree_tag, static_cast<std::uint8_t>(b), static_cast<std::uint8_t>(shard.id)};
            f.payload.reserve(sp.rows.size() * nb);
            for (std::size_t r : sp.rows)
                for (std::size_t j = 0; j < nb; ++j) f.payload.push_back(panel(r, j));
            transport.send(shard.id, sp.neighbor, std::move(f));
        }
    } else {
        if (!shard.exchange_pending[b])
            throw ProtocolError("halo_exchange: finalize without init");
        SubblockView panel(vec, b);
        for (const auto& rp : shard.recv_plan) {
            Frame f = transport.recv(shard.id, rp.neighbor);
            FrameTag expect{degree_tag, static_cast<std::uint8_t>(b),
                            static_cast<std::uint8_t>(rp.neighbor)};
            if (!(f.tag == expect)) throw ProtocolError("halo_exchange: frame tag mismatch");
            if (f.payload.size() != rp.rows.size() * nb)
                throw ProtocolError("halo_exchange: frame size mismatch");
            std::size_t off = 0;
            for (std::size_t r : rp.rows)
                for (std::size_t j = 0; j < nb; ++j) panel(r, j) = f.payload[off++];
        }
        shard.exchange_pending[b] = 0;
    }
}

struct TimelineEvent {
    enum class Kind { compute, comm };
    Kind kind;
    std::size_t block = 0;
    std::size_t degree = 0;
    double start = 0.0;
    double end = 0.0;
};

struct Timeline {
    std::vector<TimelineEvent> events;
    double makespan() const {
        double m = 0.0;
        for (const auto& e : events) m = std::max(m, e.end);
        return m;
    }
};

// Unit costs of the schedule model: c per halo exchange, k per panel
// compute.
struct CostModel {
    double comm_cost = 1.0;
    double compute_cost = 2.0;
};

// Discrete-event schedule of the degree loop for one worker: the comm link
// and the compute unit are separate resources; vector mode serializes them,
// pipelined mode posts the next panel's exchange before computing.
inline Timeline simulate_schedule(std::size_t blocks, std::size_t degrees, double comm_cost,
                                  double compute_cost, CommMode mode) {
    if (comm_cost <= 0 || compute_cost <= 0)
        throw std::invalid_argument("schedule costs must be positive");
    Timeline tl;
    double now = 0.0;
    if (mode == CommMode::vector) {
        for (std::size_t b = 0; b < blocks; ++b)
            for (std::size_t d = 0; d < degrees; ++d) {
                tl.events.push_back({TimelineEvent::Kind::comm, b, d, now, now + comm_cost});
                now += comm_cost;
                tl.events.push_back({TimelineEvent::Kind::compute, b, d, now, now + compute_cost});
                now += compute_cost;
            }
    } else {
        double link_free = 0.0;
        for (std::size_t d = 0; d < degrees; ++d) {
            double t = std::max(now, link_free);  // eager exchange of block 0
            tl.events.push_back({TimelineEvent::Kind::comm, 0, d, t, t + comm_cost});
            link_free = t + comm_cost;
            now = t + comm_cost;
            for (std::size_t b = 0; b + 1 < blocks; ++b) {
                double ls = std::max(now, link_free);
                tl.events.push_back({TimelineEvent::Kind::comm, b + 1, d, ls, ls + comm_cost});
                link_free = ls + comm_cost;
                tl.events.push_back(
                    {TimelineEvent::Kind::compute, b, d, now, now + compute_cost});
                now = std::max(now + compute_cost, ls + comm_cost);  // finalize b+1
            }
            tl.events.push_back(
                {TimelineEvent::Kind::compute, blocks - 1, d, now, now + compute_cost});
            now += compute_cost;
        }
    }
    return tl;
}

inline double simulate_timeline(std::size_t blocks, std::size_t degrees, double comm_cost,
                                double compute_cost, CommMode mode) {
    return simulate_schedule(blocks, degrees, comm_cost, compute_cost, mode).makespan();
}

struct DistributedResult {
    BlockVector X;            // gathered filtered block vector
    MomentSeries moments;     // globally reduced
    std::vector<Timeline> timelines;  // per worker, degree loop only
    TrafficCounter traffic;   // summed over workers
};

// Multi-worker filter application. Vector mode exchanges immediately
// before each panel kernel; pipelined mode runs degrees outermost and
// prefetches the next panel's halo during the current panel's compute.
// Both reproduce the serial filter output.
inline DistributedResult filter_distributed(std::vector<WorkerShard>& shards,
                                            const FilterCoefficients& fc, CommMode mode,
                                            Transport& transport, CostModel costs = {}) {
    const std::size_t workers = shards.size();
    if (workers == 0) throw std::invalid_argument("no shards");
    const std::size_t ns = shards[0].X.cols();
    const std::size_t nb = shards[0].X.block_width();
    const std::size_t panels = shards[0].X.panel_count();

    std::vector<MomentSeries> local_moments(workers);
    std::vector<Timeline> timelines(workers);
    std::vector<TrafficCounter> counters(workers);
    std::vector<std::exception_ptr> failures(workers);

    auto worker_body = [&](std::size_t w) {
        WorkerShard& sh = shards[w];
        const SparseMatrixCRS& Hl = sh.local;
        MomentSeries& mom = local_moments[w];
        mom = MomentSeries(fc.np, ns);
        TrafficCounter* tc = &counters[w];

        // Recurrence start for every panel (degrees 0..2), blocking halo
        // exchanges for the X and U panels feeding the two spmmv calls.
        for (std::size_t b = 0; b < panels; ++b) {
            SubblockView Xb(sh.X, b), Ub(sh.U, b), Wb(sh.W, b);
            halo_exchange(sh, sh.X, b, ExchangePhase::init, transport, 1);
            halo_exchange(sh, sh.X, b, ExchangePhase::finalize, transport, 1);
            spmmv_shifted(Hl, fc.map, Xb, Ub);
            halo_exchange(sh, sh.U, b, ExchangePhase::init, transport, 2);
            halo_exchange(sh, sh.U, b, ExchangePhase::finalize, transport, 2);
            spmmv_shifted_two_minus(Hl, fc.map, Ub, Wb, Xb);
            double g0c0 = fc.g[0] * fc.c[0], g1c1 = fc.g[1] * fc.c[1], g2c2 = fc.g[2] * fc.c[2];
            for (std::size_t i = 0; i < Hl.n; ++i)
                for (std::size_t j = 0; j < nb; ++j)
                    Xb(i, j) = g0c0 * Xb(i, j) + g1c1 * Ub(i, j) + g2c2 * Wb(i, j);
        }

        Timeline& tl = timelines[w];
        double now = 0.0, link_free = 0.0;
        const double c = costs.comm_cost, k = costs.compute_cost;

        if (mode == CommMode::vector) {
            for (std::size_t b = 0; b < panels; ++b)
                for (std::size_t p = 3; p <= fc.np; ++p) {
                    swap_blocks(SubblockView(sh.W, b), SubblockView(sh.U, b));
                    halo_exchange(sh, sh.U, b, ExchangePhase::init, transport,
                                  static_cast<std::uint16_t>(p));
                    halo_exchange(sh, sh.U, b, ExchangePhase::finalize, transport,
                                  static_cast<std::uint16_t>(p));
                    tl.events.push_back({TimelineEvent::Kind::comm, b, p, now, now + c});
                    now += c;
                    chebfd_op(Hl, fc.map, SubblockView(sh.U, b), SubblockView(sh.W, b),
                              SubblockView(sh.X, b), p, fc.g[p] * fc.c[p], mom, b * nb, tc);
                    tl.events.push_back({TimelineEvent::Kind::compute, b, p, now, now + k});
                    now += k;
                }
        } else {
            for (std::size_t p = 3; p <= fc.np; ++p) {
                for (std::size_t b = 0; b < panels; ++b)
                    swap_blocks(SubblockView(sh.W, b), SubblockView(sh.U, b));
                auto tag = static_cast<std::uint16_t>(p);
                halo_exchange(sh, sh.U, 0, ExchangePhase::init, transport, tag);
                halo_exchange(sh, sh.U, 0, ExchangePhase::finalize, transport, tag);
                double t = std::max(now, link_free);
                tl.events.push_back({TimelineEvent::Kind::comm, 0, p, t, t + c});
                link_free = t + c;
                now = t + c;
                for (std::size_t b = 0; b + 1 < panels; ++b) {
                    halo_exchange(sh, sh.U, b + 1, ExchangePhase::init, transport, tag);
                    double ls = std::max(now, link_free);
                    tl.events.push_back({TimelineEvent::Kind::comm, b + 1, p, ls, ls + c});
                    link_free = ls + c;
                    chebfd_op(Hl, fc.map, SubblockView(sh.U, b), SubblockView(sh.W, b),
                              SubblockView(sh.X, b), p, fc.g[p] * fc.c[p], mom, b * nb, tc);
                    tl.events.push_back({TimelineEvent::Kind::compute, b, p, now, now + k});
                    halo_exchange(sh, sh.U, b + 1, ExchangePhase::finalize, transport, tag);
                    now = std::max(now + k, ls + c);
                }
                chebfd_op(Hl, fc.map, SubblockView(sh.U, panels - 1), SubblockView(sh.W, panels - 1),
                          SubblockView(sh.X, panels - 1), p, fc.g[p] * fc.c[p], mom,
                          (panels - 1) * nb, tc);
                tl.events.push_back({TimelineEvent::Kind::compute, panels - 1, p, now, now + k});
                now += k;
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        threads.emplace_back([&, w] {
            try {
                worker_body(w);
            } catch (...) {
                failures[w] = std::current_exception();
            }
        });
    for (auto& th : threads) th.join();
    for (std::size_t w = 0; w < workers; ++w)
        if (failures[w]) {
            try {
                std::rethrow_exception(failures[w]);
            } catch (const std::exception& e) {
                throw std::runtime_error("distributed run aborted: worker " + std::to_string(w) +
                                         ": " + e.what());
            }
        }

    DistributedResult result;
    std::size_t n = 0;
    for (const auto& sh : shards) n += sh.local_n;
    result.X = BlockVector(n, ns, nb);
    for (const auto& sh : shards)
        for (std::size_t j = 0; j < ns; ++j)
            for (std::size_t i = 0; i < sh.local_n; ++i)
                result.X(sh.row_begin + i, j) = sh.X(i, j);

    // Global moment reduction: fixed worker-rank-ordered tree.
    for (std::size_t stride = 1; stride < workers; stride *= 2)
        for (std::size_t w = 0; w + stride < workers; w += 2 * stride)
            for (std::size_t idx = 0; idx < local_moments[w].eta.size(); ++idx) {
                local_moments[w].eta[idx] += local_moments[w + stride].eta[idx];
                local_moments[w].mu[idx] += local_moments[w + stride].mu[idx];
            }
    result.moments = std::move(local_moments[0]);
    result.timelines = std::move(timelines);
    for (const auto& tc : counters) {
        result.traffic.panel_reads += tc.panel_reads;
        result.traffic.panel_writes += tc.panel_writes;
        result.traffic.matrix_sweeps += tc.matrix_sweeps;
    }
    return result;
}

}  // namespace chebfilter
