# Gunicorn configuration file
import multiprocessing
import os

bind = f"0.0.0.0:{os.getenv('PORT', '10000')}"

# Explanations are CPU bound; one sync worker per core
workers = int(os.getenv('WEB_CONCURRENCY', multiprocessing.cpu_count()))
worker_class = 'sync'
timeout = 300  # full enumerations on large graphs can run for minutes
graceful_timeout = 30
max_requests = 500
max_requests_jitter = 50

accesslog = '-'
errorlog = '-'
loglevel = os.getenv('XPG_LOG_LEVEL', 'info').lower()

proc_name = 'xpg-explain'
