import os

ACCEPTANCE_ENVIRONMENT_VARIABLE = 'MISMEASURE_ACCEPTANCE'
RUN_ACCEPTANCE = os.environ.get(ACCEPTANCE_ENVIRONMENT_VARIABLE) == '1'
SKIP_REASON = f'Set {ACCEPTANCE_ENVIRONMENT_VARIABLE}=1 to run the long-running reproductions.'
