#pragma once

#include <complex>
#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <deque>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <sys/socket.h>
#include <unistd.h>

namespace chebfilter {

using cplx = std::complex<double>;

// Tag of one halo frame: (degree, block, neighbor) packed into a u32.
struct FrameTag {
    std::uint16_t degree = 0;
    std::uint8_t block = 0;
    std::uint8_t neighbor = 0;

    std::uint32_t pack() const {
        return (static_cast<std::uint32_t>(degree) << 16) |
               (static_cast<std::uint32_t>(block) << 8) | neighbor;
    }
    static FrameTag unpack(std::uint32_t v) {
        return {static_cast<std::uint16_t>(v >> 16), static_cast<std::uint8_t>(v >> 8),
                static_cast<std::uint8_t>(v)};
    }
    bool operator==(const FrameTag&) const = default;
};

struct Frame {
    FrameTag tag;
    std::vector<cplx> payload;
};

// Length-prefixed frame: u32 tag, u64 payload byte count, then the raw
// complex data as little-endian (re, im) float64 pairs.
inline std::vector<std::uint8_t> encode_frame(const Frame& f) {
    std::vector<std::uint8_t> out(4 + 8 + 16 * f.payload.size());
    std::uint32_t tag = f.tag.pack();
    std::uint64_t bytes = 16 * static_cast<std::uint64_t>(f.payload.size());
    for (int k = 0; k < 4; ++k) out[k] = static_cast<std::uint8_t>(tag >> (8 * k));
    for (int k = 0; k < 8; ++k) out[4 + k] = static_cast<std::uint8_t>(bytes >> (8 * k));
    std::size_t off = 12;
    for (const cplx& z : f.payload) {
        double parts[2] = {z.real(), z.imag()};
        for (double d : parts) {
            std::uint64_t u;
            std::memcpy(&u, &d, 8);
            for (int k = 0; k < 8; ++k) out[off++] = static_cast<std::uint8_t>(u >> (8 * k));
        }
    }
    return out;
}

inline Frame decode_frame(const std::uint8_t* data, std::size_t len) {
    if (len < 12) throw std::runtime_error("frame too short");
    std::uint32_t tag = 0;
    for (int k = 0; k < 4; ++k) tag |= static_cast<std::uint32_t>(data[k]) << (8 * k);
    std::uint64_t bytes = 0;
    for (int k = 0; k < 8; ++k) bytes |= static_cast<std::uint64_t>(data[4 + k]) << (8 * k);
    if (bytes % 16 != 0 || len < 12 + bytes) throw std::runtime_error("frame payload truncated");
    Frame f;
    f.tag = FrameTag::unpack(tag);
    f.payload.resize(bytes / 16);
    std::size_t off = 12;
    for (cplx& z : f.payload) {
        double parts[2];
        for (double& d : parts) {
            std::uint64_t u = 0;
            for (int k = 0; k < 8; ++k) u |= static_cast<std::uint64_t>(data[off++]) << (8 * k);
            std::memcpy(&d, &u, 8);
        }
        z = cplx(parts[0], parts[1]);
    }
    return f;
}

inline Frame decode_frame(const std::vector<std::uint8_t>& buf) {
    return decode_frame(buf.data(), buf.size());
}

// Point-to-point transport between workers. send is non-blocking; recv
// blocks until a frame from the given peer arrives. Frames between a fixed
// (from, to) pair are delivered in order.
class Transport {
  public:
    virtual ~Transport() = default;
    virtual void send(std::size_t from, std::size_t to, Frame frame) = 0;
    virtual Frame recv(std::size_t to, std::size_t from) = 0;
};

// In-process transport over mutex-protected queues. Deterministic and
// dependency-free; used by the tests and the timeline comparisons.
class QueueTransport : public Transport {
  public:
    explicit QueueTransport(std::size_t workers) : workers_(workers) {}

    void send(std::size_t from, std::size_t to, Frame frame) override {
        check(from, to);
        {
            std::lock_guard<std::mutex> lock(mutex_);
            queues_[{from, to}].push_back(std::move(frame));
        }
        cv_.notify_all();
    }

    Frame recv(std::size_t to, std::size_t from) override {
        check(from, to);
        std::unique_lock<std::mutex> lock(mutex_);
        auto& q = queues_[{from, to}];
        cv_.wait(lock, [&] { return !q.empty(); });
        Frame f = std::move(q.front());
        q.pop_front();
        return f;
    }

  private:
    void check(std::size_t from, std::size_t to) const {
        if (from >= workers_ || to >= workers_)
            throw std::invalid_argument("transport: worker id out of range");
    }

    std::size_t workers_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::map<std::pair<std::size_t, std::size_t>, std::deque<Frame>> queues_;
};

// Transport over local socket pairs carrying the encoded frame format.
// Demonstrates real asynchrony: sends land in the kernel socket buffer and
// progress independently of the receiver.
class SocketTransport : public Transport {
  public:
    explicit SocketTransport(std::size_t workers) : workers_(workers), fds_(workers * workers, -1) {
        for (std::size_t a = 0; a < workers; ++a)
            for (std::size_t b = a + 1; b < workers; ++b) {
                int sv[2];
                if (::socketpair(AF_UNIX, SOCK_STREAM, 0, sv) != 0)
                    throw std::runtime_error("socketpair failed");
                fds_[a * workers + b] = sv[0];  // endpoint held by a, peer b
                fds_[b * workers + a] = sv[1];
            }
    }
    ~SocketTransport() override {
        for (int fd : fds_)
            if (fd >= 0) ::close(fd);
    }
    SocketTransport(const SocketTransport&) = delete;
    SocketTransport& operator=(const SocketTransport&) = delete;

    void send(std::size_t from, std::size_t to, Frame frame) override {
        auto buf = encode_frame(frame);
        write_all(fd_for(from, to), buf.data(), buf.size());
    }

    Frame recv(std::size_t to, std::size_t from) override {
        int fd = fd_for(to, from);
        std::uint8_t header[12];
        read_all(fd, header, 12);
        std::uint64_t bytes = 0;
        for (int k = 0; k < 8; ++k) bytes |= static_cast<std::uint64_t>(header[4 + k]) << (8 * k);
        std::vector<std::uint8_t> buf(12 + bytes);
        std::memcpy(buf.data(), header, 12);
        read_all(fd, buf.data() + 12, bytes);
        return decode_frame(buf);
    }

  private:
    int fd_for(std::size_t self, std::size_t peer) const {
        if (self >= workers_ || peer >= workers_ || self == peer)
            throw std::invalid_argument("transport: bad worker pair");
        return fds_[self * workers_ + peer];
    }
    static void write_all(int fd, const std::uint8_t* p, std::size_t len) {
        while (len > 0) {
            ssize_t r = ::write(fd, p, len);
            if (r <= 0) throw std::runtime_error("socket write failed");
            p += r;
            len -= static_cast<std::size_t>(r);
        }
    }
    static void read_all(int fd, std::uint8_t* p, std::size_t len) {
        while (len > 0) {
            ssize_t r = ::read(fd, p, len);
            if (r <= 0) throw std::runtime_error("socket read failed");
            p += r;
            len -= static_cast<std::size_t>(r);
        }
    }

    std::size_t workers_;
    std::vector<int> fds_;
};

}  // namespace chebfilter
