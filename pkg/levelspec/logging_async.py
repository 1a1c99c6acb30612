import asyncio, logging, sys

LOGGER_NAME = "levelspec"


def _running_loop():
    try:
        return asyncio.get_running_loop()
    except RuntimeError:
        return None


class AsyncQueueHandler(logging.Handler):
    """Non-blocking async-safe handler that enqueues records.

    Records emitted from worker threads are handed to the owning loop with
    ``call_soon_threadsafe``.
    """

    def __init__(self, queue: asyncio.Queue, loop=None):
        super().__init__()
        self.queue = queue
        self.loop = loop

    def emit(self, record: logging.LogRecord) -> None:
        try:
            item = (record.levelno, self.format(record))
            if self.loop is not None and _running_loop() is not self.loop:
                self.loop.call_soon_threadsafe(self.queue.put_nowait, item)
            else:
                self.queue.put_nowait(item)
        except Exception:
            self.handleError(record)


async def log_worker(
    queue: asyncio.Queue,
    stop_event: asyncio.Event,
    level=logging.INFO,
    stream=None,
) -> None:
    base_handler = logging.StreamHandler(stream or sys.stdout)
    formatter = logging.Formatter(
        "[%(asctime)s] %(levelname)s> %(message)s", "%H:%M:%S"
    )
    base_handler.setFormatter(formatter)

    while not stop_event.is_set() or not queue.empty():
        try:
            lvl, msg = await asyncio.wait_for(queue.get(), timeout=0.5)
            if lvl >= level:
                record = logging.LogRecord(
                    LOGGER_NAME, lvl, "", 0, msg, None, None
                )
                base_handler.emit(record)
            queue.task_done()
        except asyncio.TimeoutError:
            continue
        except Exception as e:
            sys.stderr.write(f"[log_worker error] {e}\n")

    base_handler.flush()


def get_logger(
    queue: asyncio.Queue, name: str = LOGGER_NAME, level=logging.INFO
) -> logging.Logger:
    """Logger ``name`` feeding ``queue``, replacing handlers of earlier runs."""
    logger = logging.getLogger(name)
    for handler in list(logger.handlers):
        if isinstance(handler, AsyncQueueHandler) and handler.queue is not queue:
            logger.removeHandler(handler)
    if not any(isinstance(h, AsyncQueueHandler) for h in logger.handlers):
        handler = AsyncQueueHandler(queue, loop=_running_loop())
        handler.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(handler)
    logger.setLevel(level)
    logger.propagate = False
    return logger
