// Command-line front end: matrix generation, interior eigenvalue solves,
// kernel and bandwidth benchmarks, model calculators, and scaling plans.

#include <chrono>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "chebfilter/dist.hpp"
#include "chebfilter/filter.hpp"
#include "chebfilter/matrix_market.hpp"
#include "chebfilter/perf_model.hpp"

using json = nlohmann::json;
using namespace chebfilter;

namespace {

// Shortest decimal that round-trips to the same double.
std::string fmt_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

struct ReportRow {
    std::string run_id;
    std::size_t n = 0, n_s = 0, n_b = 0, n_p = 0, workers = 1;
    std::string mode = "serial";
    double wall_seconds = 0.0;
    double flops = 0.0;
    double flop_rate = 0.0;
    double model_p_star = 0.0;
};

const char* kReportColumns =
    "run_id,n,n_s,n_b,n_p,workers,mode,wall_seconds,flops,flop_rate,model_p_star";

json row_to_json(const ReportRow& r) {
    return json{{"run_id", r.run_id},
                {"n", r.n},
                {"n_s", r.n_s},
                {"n_b", r.n_b},
                {"n_p", r.n_p},
                {"workers", r.workers},
                {"mode", r.mode},
                {"wall_seconds", r.wall_seconds},
                {"flops", r.flops},
                {"flop_rate", r.flop_rate},
                {"model_p_star", r.model_p_star}};
}

std::string rows_to_csv(const std::vector<ReportRow>& rows) {
    std::ostringstream out;
    out << kReportColumns << "\n";
    for (const auto& r : rows)
        out << r.run_id << "," << r.n << "," << r.n_s << "," << r.n_b << "," << r.n_p << ","
            << r.workers << "," << r.mode << "," << fmt_double(r.wall_seconds) << ","
            << fmt_double(r.flops) << "," << fmt_double(r.flop_rate) << ","
            << fmt_double(r.model_p_star) << "\n";
    return out.str();
}

void emit_text(const std::string& text, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open output path " + out_path);
    out << text;
    if (!out) throw std::runtime_error("write failed for " + out_path);
}

void emit_report(const std::vector<ReportRow>& rows, const std::string& format,
                 const std::string& out_path) {
    if (format == "csv") {
        emit_text(rows_to_csv(rows), out_path);
    } else {
        json arr = json::array();
        for (const auto& r : rows) arr.push_back(row_to_json(r));
        emit_text(arr.dump(2) + "\n", out_path);
    }
}

// Effective configuration echo; rerunning with these key=value pairs
// reproduces the run.
void print_config(const std::vector<std::pair<std::string, std::string>>& kv) {
    std::cerr << "# effective config\n";
    for (const auto& [k, v] : kv) std::cerr << "# " << k << "=" << v << "\n";
}

struct UserError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

LatticeSpec lattice_from(std::size_t nx, std::size_t ny, std::size_t nz, double mass, double hop,
                         const std::string& boundary) {
    if (nx < 1 || ny < 1 || nz < 1) throw UserError("lattice extents must be positive");
    LatticeSpec spec;
    spec.nx = nx;
    spec.ny = ny;
    spec.nz = nz;
    spec.mass = mass;
    spec.hop = hop;
    if (boundary == "periodic")
        spec.boundary = Boundary::periodic;
    else if (boundary == "open")
        spec.boundary = Boundary::open;
    else
        throw UserError("boundary must be periodic or open");
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chebyshev filter diagonalization toolkit"};
    app.set_config("--config")->description("flat key=value config file; flags override");
    app.require_subcommand(1);

    // Shared options.
    std::size_t nx = 4, ny = 4, nz = 4;
    double mass = 1.0, hop = 1.0;
    std::string boundary = "periodic";
    std::size_t ns = 16, nb = 4, np = 200, workers = 1;
    std::vector<double> window{-0.2, 0.2};
    std::string mode = "vector", damping = "jackson", emit = "json", out_path;
    std::uint64_t seed = 42;
    double tol = 1e-9;

    auto add_lattice = [&](CLI::App* cmd) {
        cmd->add_option("--nx", nx, "lattice extent x");
        cmd->add_option("--ny", ny, "lattice extent y");
        cmd->add_option("--nz", nz, "lattice extent z");
        cmd->add_option("--mass", mass, "onsite mass parameter");
        cmd->add_option("--hop", hop, "hopping parameter");
        cmd->add_option("--boundary", boundary)->check(CLI::IsMember({"periodic", "open"}));
    };
    auto add_emit = [&](CLI::App* cmd) {
        cmd->add_option("--emit", emit)->check(CLI::IsMember({"json", "csv"}));
        cmd->add_option("--out", out_path, "output path (default stdout)");
    };

    auto* gen = app.add_subcommand("generate", "generate a Topi test matrix (Matrix Market)");
    add_lattice(gen);
    std::string gen_out;
    gen->add_option("--out", gen_out, "output .mtx path")->required();

    auto* solve = app.add_subcommand("solve", "compute interior eigenpairs in a window");
    add_lattice(solve);
    std::string matrix_path;
    std::size_t max_restarts = 30;
    solve->add_option("--matrix", matrix_path, "read matrix from Matrix Market file instead");
    solve->add_option("--window", window, "search window LO HI")->expected(2);
    solve->add_option("--ns", ns, "search space size");
    solve->add_option("--nb", nb, "subspace block width");
    solve->add_option("--np", np, "polynomial degree");
    solve->add_option("--tol", tol, "residual tolerance");
    solve->add_option("--seed", seed, "start block seed");
    solve->add_option("--max-restarts", max_restarts);
    solve->add_option("--damping", damping)->check(CLI::IsMember({"jackson", "none"}));
    add_emit(solve);

    auto* bench = app.add_subcommand("bench-kernel", "time the blocked filter application");
    add_lattice(bench);
    bench->add_option("--ns", ns);
    bench->add_option("--nb", nb);
    bench->add_option("--np", np);
    bench->add_option("--seed", seed);
    bench->add_option("--workers", workers, "worker count (>1 runs the distributed filter)");
    bench->add_option("--mode", mode)->check(CLI::IsMember({"vector", "pipelined"}));
    double bench_bw = 540e9, bench_pmax = 1e12;
    bench->add_option("--bandwidth", bench_bw, "model bandwidth bytes/s");
    bench->add_option("--pmax", bench_pmax, "model peak flop/s");
    add_emit(bench);

    auto* stream = app.add_subcommand("bench-stream", "STREAM-style bandwidth benchmark");
    std::size_t elems = 1 << 25, reps = 10;
    std::string kind = "triad";
    stream->add_option("--elems", elems, "elements per array");
    stream->add_option("--kind", kind)->check(CLI::IsMember({"copy", "scale", "add", "triad"}));
    stream->add_option("--reps", reps);
    add_emit(stream);

    auto* model = app.add_subcommand("model", "Roofline / intensity / traffic calculator");
    std::size_t model_n = 2097152;
    double model_nnzr = 13.0, model_bw = 540e9, model_pmax = 1e12;
    model->add_option("--nb", nb)->required();
    model->add_option("--n", model_n, "rows");
    model->add_option("--nnzr", model_nnzr, "average nonzeros per row");
    model->add_option("--bandwidth", model_bw, "bytes/s");
    model->add_option("--pmax", model_pmax, "flop/s");
    add_emit(model);

    auto* scale = app.add_subcommand("scale-sim", "weak-scaling plan and schedule simulation");
    std::size_t nscal = 1;
    double comm_cost = 1.0, compute_cost = 2.0;
    scale->add_option("--ns", nscal, "scaling factor n_scal")->required();
    scale->add_option("--nb", nb);
    scale->add_option("--np", np);
    scale->add_option("--mode", mode)->check(CLI::IsMember({"vector", "pipelined"}));
    scale->add_option("--comm-cost", comm_cost);
    scale->add_option("--compute-cost", compute_cost);
    scale->add_option("--bandwidth", model_bw, "bytes/s");
    scale->add_option("--pmax", model_pmax, "flop/s");
    add_emit(scale);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) {
            LatticeSpec spec = lattice_from(nx, ny, nz, mass, hop, boundary);
            print_config({{"command", "generate"},
                          {"nx", std::to_string(nx)},
                          {"ny", std::to_string(ny)},
                          {"nz", std::to_string(nz)},
                          {"mass", fmt_double(mass)},
                          {"hop", fmt_double(hop)},
                          {"boundary", boundary},
                          {"out", gen_out}});
            matrix_market_write(gen_out, topi_generate(spec));
            std::cerr << "wrote " << gen_out << " (n=" << spec.dim() << ")\n";
        } else if (solve->parsed()) {
            if (ns == 0 || nb == 0 || ns % nb != 0) throw UserError("n_b must divide n_s");
            SparseMatrixCRS H = matrix_path.empty()
                                    ? topi_generate(lattice_from(nx, ny, nz, mass, hop, boundary))
                                    : matrix_market_read(matrix_path);
            print_config({{"command", "solve"},
                          {"matrix", matrix_path.empty() ? "topi" : matrix_path},
                          {"nx", std::to_string(nx)},
                          {"ny", std::to_string(ny)},
                          {"nz", std::to_string(nz)},
                          {"window_lo", fmt_double(window[0])},
                          {"window_hi", fmt_double(window[1])},
                          {"ns", std::to_string(ns)},
                          {"nb", std::to_string(nb)},
                          {"np", std::to_string(np)},
                          {"tol", fmt_double(tol)},
                          {"seed", std::to_string(seed)},
                          {"damping", damping}});
            SolveOptions opt;
            opt.n_s = ns;
            opt.n_b = nb;
            opt.n_p = np;
            opt.res_tol = tol;
            opt.seed = seed;
            opt.max_restarts = max_restarts;
            opt.damping = damping == "jackson" ? Damping::jackson : Damping::none;
            SolveResult res = chebfd_solve(H, window[0], window[1], opt);
            json j{{"converged", res.converged},
                   {"iterations", res.iterations},
                   {"eigenvalues", res.eigenvalues},
                   {"residuals", res.residuals}};
            if (emit == "csv") {
                std::ostringstream csv;
                csv << "eigenvalue,residual\n";
                for (std::size_t i = 0; i < res.eigenvalues.size(); ++i)
                    csv << fmt_double(res.eigenvalues[i]) << "," << fmt_double(res.residuals[i])
                        << "\n";
                emit_text(csv.str(), out_path);
            } else {
                emit_text(j.dump(2) + "\n", out_path);
            }
        } else if (bench->parsed()) {
            if (ns == 0 || nb == 0 || ns % nb != 0) throw UserError("n_b must divide n_s");
            LatticeSpec spec = lattice_from(nx, ny, nz, mass, hop, boundary);
            SparseMatrixCRS H = topi_generate(spec);
            if (workers > spec.sites()) throw UserError("more workers than lattice sites");
            print_config({{"command", "bench-kernel"},
                          {"nx", std::to_string(nx)},
                          {"ny", std::to_string(ny)},
                          {"nz", std::to_string(nz)},
                          {"ns", std::to_string(ns)},
                          {"nb", std::to_string(nb)},
                          {"np", std::to_string(np)},
                          {"workers", std::to_string(workers)},
                          {"mode", mode},
                          {"seed", std::to_string(seed)}});
            auto [lo, hi] = gershgorin_bounds(H);
            ShiftScale map = spectral_map(lo, hi, 0.01);
            double span = hi - lo;
            FilterCoefficients fc = filter_coefficients(lo + 0.45 * span, lo + 0.55 * span, map, np);
            BlockVector X(H.n, ns, nb, InitSeededRandom{seed});
            auto t0 = std::chrono::steady_clock::now();
            if (workers <= 1) {
                apply_filter(H, X, fc);
            } else {
                PartitionPlan plan = partition_rows(H, workers);
                auto shards = shard_and_distribute(H, X, plan);
                QueueTransport transport(workers);
                filter_distributed(shards, fc,
                                   mode == "pipelined" ? CommMode::pipelined : CommMode::vector,
                                   transport);
            }
            double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                              .count();
            KernelGeometry g;
            g.n = H.n;
            g.n_nzr = H.avg_nnz_per_row();
            g.n_b = nb;
            double total_flops = flop_count(g, np - 2) * (ns / nb);
            ReportRow row;
            row.run_id = "bench-kernel";
            row.n = H.n;
            row.n_s = ns;
            row.n_b = nb;
            row.n_p = np;
            row.workers = workers;
            row.mode = workers <= 1 ? "serial" : mode;
            row.wall_seconds = secs;
            row.flops = total_flops;
            row.flop_rate = secs > 0 ? total_flops / secs : 0.0;
            row.model_p_star = roofline_limit(bench_pmax, bench_bw, arithmetic_intensity(g)).p_star;
            emit_report({row}, emit, out_path);
        } else if (stream->parsed()) {
            StreamKind sk = kind == "copy"    ? StreamKind::copy
                            : kind == "scale" ? StreamKind::scale
                            : kind == "add"   ? StreamKind::add
                                              : StreamKind::triad;
            print_config({{"command", "bench-stream"},
                          {"elems", std::to_string(elems)},
                          {"kind", kind},
                          {"reps", std::to_string(reps)}});
            double bw = stream_bench(elems, sk, reps);
            json j{{"kind", kind},
                   {"elems", elems},
                   {"bytes_per_element", stream_bytes_per_element(sk)},
                   {"bandwidth_bytes_per_s", bw}};
            emit_text(j.dump(2) + "\n", out_path);
        } else if (model->parsed()) {
            print_config({{"command", "model"},
                          {"nb", std::to_string(nb)},
                          {"n", std::to_string(model_n)},
                          {"nnzr", fmt_double(model_nnzr)},
                          {"bandwidth", fmt_double(model_bw)},
                          {"pmax", fmt_double(model_pmax)}});
            KernelGeometry g;
            g.n = model_n;
            g.n_nzr = model_nnzr;
            g.n_b = nb;
            double intensity = arithmetic_intensity(g);
            RooflinePoint pt = roofline_limit(model_pmax, model_bw, intensity);
            auto [rd, wr] = min_traffic_volume(g);
            json j{{"inputs",
                    {{"n", g.n},
                     {"n_nzr", g.n_nzr},
                     {"n_b", g.n_b},
                     {"entry_bytes", g.entry_bytes},
                     {"vec_elem_bytes", g.vec_elem_bytes},
                     {"flops_per_row_per_vec", g.flops_per_row_per_vec},
                     {"bandwidth", model_bw},
                     {"pmax", model_pmax}}},
                   {"intensity", intensity},
                   {"p_star", pt.p_star},
                   {"read_bytes", rd},
                   {"write_bytes", wr}};
            emit_text(j.dump(2) + "\n", out_path);
        } else if (scale->parsed()) {
            // Weak-scaling plan: one 128 x 64 x 64 subdomain per worker,
            // 2 * nscal^2 workers on a Topi-(128 nscal)-(128 nscal)-64 lattice.
            if (nscal < 1) throw UserError("ns must be >= 1");
            print_config({{"command", "scale-sim"},
                          {"ns", std::to_string(nscal)},
                          {"nb", std::to_string(nb)},
                          {"np", std::to_string(np)},
                          {"mode", mode}});
            std::size_t workers_plan = 2 * nscal * nscal;
            std::size_t gx = 128 * nscal, gy = 64 * 2 * nscal, gz = 64;
            std::size_t dim = 4 * gx * gy * gz;
            // Boundary planes of the per-worker subdomain, both directions.
            std::size_t halo_rows = 2 * 4 * 128 * 64;
            KernelGeometry g;
            g.n = dim;
            g.n_b = nb;
            double intensity = arithmetic_intensity(g);
            RooflinePoint pt = roofline_limit(model_pmax, model_bw, intensity);
            CommMode cm = mode == "pipelined" ? CommMode::pipelined : CommMode::vector;
            std::size_t degrees = np >= 3 ? np - 2 : 0;
            std::size_t blocks = std::max<std::size_t>(ns / std::max<std::size_t>(nb, 1), 1);
            double sim_vector = simulate_timeline(blocks, degrees, comm_cost, compute_cost,
                                                  CommMode::vector);
            double sim_selected = simulate_timeline(blocks, degrees, comm_cost, compute_cost, cm);
            json j{{"workers", workers_plan},
                   {"subdomain", {{"nx", 128}, {"ny", 64}, {"nz", 64}}},
                   {"global", {{"nx", gx}, {"ny", gy}, {"nz", gz}}},
                   {"dimension", dim},
                   {"halo_rows_per_worker", halo_rows},
                   {"halo_bytes_per_panel", halo_rows * nb * 16},
                   {"intensity", intensity},
                   {"model_p_star", pt.p_star},
                   {"mode", mode},
                   {"simulated_time", sim_selected},
                   {"simulated_time_vector", sim_vector}};
            emit_text(j.dump(2) + "\n", out_path);
        }
    } catch (const UserError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
