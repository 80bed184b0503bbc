"""
A shared inspection session over the wire
=========================================

Starts the collaboration server on a loopback port and connects three
headless participants. One drives the playback controls, one points at
the midspan with a laser ray, and one streams scan batches as if a
live capture were running. Everything each participant ends up seeing
comes off the wire; nothing is shared in memory.
"""

import asyncio

import bridgeroom as br


async def main():
    server = br.RoomServer()
    await server.start("127.0.0.1", 0)
    uri = "ws://127.0.0.1:%d" % server.port
    print("server listening on %s" % uri)

    operator = br.SessionClient()
    inspector = br.SessionClient()
    scanner = br.SessionClient()
    try:
        # -------------------------------------------------------------- join
        for client, name in ((operator, "operator"), (inspector, "inspector"),
                             (scanner, "scanner")):
            await client.connect(uri)
            await client.join("bridge-deck", name)
            print("joined: %-9s user_id=%d color=%s"
                  % (name, client.user_id, client.color))

        # ------------------------------------------- operator drives playback
        await operator.send_update({"active_model": "tls_pointcloud",
                                    "duration_s": 4.0})
        await operator.send_update({"scale": 200.0, "speed": 1.0,
                                    "axis_mask": [0, 0, 1]})
        await operator.send_update({"tracked_nodes": [6], "playing": True})
        await inspector.wait_for_seq(3)
        await scanner.wait_for_seq(3)
        print()
        print("converged state at seq %d:" % inspector.state["seq"])
        for key in ("playing", "scale", "speed", "axis_mask",
                    "tracked_nodes", "duration_s"):
            print("  %-13s = %s" % (key, inspector.state[key]))
        assert inspector.state == scanner.state == operator.state

        # ------------------------------------------------ inspector points
        await inspector.send_pointer((1.6, -0.5, 1.2), (0.0, 0.3, -1.0))
        await operator.wait_for(lambda c: c.pointers)
        ray = operator.pointers[0]
        print()
        print("operator sees inspector's ray: origin=%s direction=%s"
              % (ray["origin"], ray["direction"]))

        # ---------------------------------------------- scanner streams in
        for batch_seq in range(1, 4):
            points = [[0.5 * batch_seq, 0.1 * k, 0.0] for k in range(4)]
            await scanner.send_scan_batch(batch_seq, points)
        await inspector.wait_for(lambda c: len(c.scan_batches) == 3)
        total = sum(len(b["points"]) for b in inspector.scan_batches)
        print()
        print("inspector accumulated %d scan batches, %d points, order %s"
              % (len(inspector.scan_batches), total,
                 [b["batch_seq"] for b in inspector.scan_batches]))

        # -------------------------------------- a latecomer gets the replay
        latecomer = br.SessionClient()
        await latecomer.connect(uri)
        await latecomer.join("bridge-deck", "latecomer")
        await latecomer.wait_for(lambda c: len(c.scan_batches) == 3)
        print()
        print("latecomer state seq %d, replayed batches %s, roster %s"
              % (latecomer.state["seq"],
                 [b["batch_seq"] for b in latecomer.scan_batches],
                 [u["name"] for u in latecomer.roster]))
        await latecomer.close()
    finally:
        for client in (operator, inspector, scanner):
            await client.close()
        await server.stop()


if __name__ == "__main__":
    asyncio.run(main())
