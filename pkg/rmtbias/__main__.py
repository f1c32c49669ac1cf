import sys

from rmtbias.main import main

sys.exit(main())
