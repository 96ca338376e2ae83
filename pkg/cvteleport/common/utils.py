"""Common utilities for long-running numerical steps."""
import contextlib
import time

from absl import logging


@contextlib.contextmanager
def timing(msg: str):
  logging.info('Started %s', msg)
  tic = time.perf_counter()
  yield
  toc = time.perf_counter()
  logging.info('Finished %s in %.3f seconds', msg, toc - tic)
