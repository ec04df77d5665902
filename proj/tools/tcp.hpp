#pragma once

#include "kap/frame.hpp"

#include <cstdint>
#include <string>

namespace kap::cli {

// Minimal blocking TCP transport for the serve/connect demo: one connection,
// length-prefixed frames, 60 s receive timeout. Errors surface as IoError
// (or the decoder's typed errors for malformed frames).
class TcpConn {
public:
    TcpConn(TcpConn&& other) noexcept;
    TcpConn& operator=(TcpConn&& other) noexcept;
    TcpConn(const TcpConn&) = delete;
    TcpConn& operator=(const TcpConn&) = delete;
    ~TcpConn();

    static TcpConn connect(const std::string& host, std::uint16_t port);

    void send_frame(const Frame& f);
    Frame recv_frame();

private:
    explicit TcpConn(int fd);
    friend class TcpListener;

    int fd_ = -1;
};

class TcpListener {
public:
    explicit TcpListener(std::uint16_t port); // 0 picks an ephemeral port
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;
    ~TcpListener();

    std::uint16_t port() const { return port_; }
    TcpConn accept_one();

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

} // namespace kap::cli
