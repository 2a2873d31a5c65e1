import math
import unittest

from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from chiral.acceptance import CriterionResult
from chiral.config.schemas import Base, CriterionRecord, RunRecord
from chiral.utils.db_utils import DBUtil


class TestRunRecord(unittest.TestCase):
    def setUp(self):
        self.engine = create_engine('sqlite:///:memory:')
        Base.metadata.create_all(self.engine)
        self.session = sessionmaker(bind=self.engine)()

    def test_run_record_init(self):
        run = RunRecord(command="two", parameters='{"m": 2}', seed="7", exit_code=0)

        self.assertEqual(run.command, "two")
        self.assertEqual(run.parameters, '{"m": 2}')
        self.assertEqual(run.seed, "7")
        self.assertEqual(run.exit_code, 0)
        self.assertIn("command=two", repr(run))

    def test_delete_run_removes_criteria(self):
        run = RunRecord(command="validate", exit_code=1)
        criteria = [CriterionRecord(name=f"criterion_{i}", group="parity", passed=i % 2 == 0, run=run) for i in range(4)]
        self.session.add(run)
        self.session.add_all(criteria)
        self.session.commit()
        run_id = run.id
        criterion_ids = [criterion.id for criterion in criteria]

        # Check that the run and its criteria were added to the database
        assert self.session.query(RunRecord).filter_by(id=run_id).count() == 1
        assert self.session.query(CriterionRecord).filter(CriterionRecord.id.in_(criterion_ids)).count() == 4

        self.session.delete(run)
        self.session.commit()

        # Check that the run and its criteria were removed from the database
        assert self.session.query(RunRecord).filter_by(id=run_id).count() == 0
        assert self.session.query(CriterionRecord).filter(CriterionRecord.id.in_(criterion_ids)).count() == 0

    def test_orphan_criterion_is_deleted(self):
        run = RunRecord(command="validate", exit_code=0)
        criterion = CriterionRecord(name="odd_parity_closed_form", group="parity", passed=True)
        run.criteria.append(criterion)
        self.session.add(run)
        self.session.commit()

        run.criteria.remove(criterion)
        self.session.commit()
        self.assertEqual(self.session.query(CriterionRecord).count(), 0)


class TestDBUtil(unittest.TestCase):
    def setUp(self):
        self.db = DBUtil()
        self.db.connect_db('sqlite:///:memory:')
        self.db.create_all_tables()

    def tearDown(self):
        self.db.close_db()

    def test_record_run(self):
        run = self.db.record_run("single", {"m": 3, "grid": "-1.0:1.0:5"}, 2**64 - 1, None, "csv", 0, 0.25)
        stored = DBUtil.session.query(RunRecord).one()
        self.assertEqual(stored, run)
        self.assertEqual(stored.parameters, '{"grid": "-1.0:1.0:5", "m": 3}')
        self.assertEqual(int(stored.seed), 2**64 - 1)
        self.assertEqual(stored.output_path, "")
        self.assertIsNotNone(stored.started_at)

    def test_record_criteria(self):
        run = self.db.record_run("validate", {}, 1, "results.csv", "csv", 1, 3.0)
        self.db.record_criteria(
            run,
            [
                CriterionResult("even_parity_unscattered", "parity", True, 1e-12, 1e-9),
                CriterionResult("odd_parity_closed_form", "parity", False, math.nan, 1e-9, "GridTooCoarse"),
            ],
        )
        stored = DBUtil.session.query(CriterionRecord).order_by(CriterionRecord.id).all()
        self.assertEqual([criterion.name for criterion in stored], ["even_parity_unscattered", "odd_parity_closed_form"])
        self.assertEqual(stored[0].measured, 1e-12)
        self.assertIsNone(stored[1].measured)
        self.assertEqual(stored[1].run, run)

    def test_recent_runs(self):
        for command in ("single", "two", "single"):
            self.db.record_run(command, {}, 1, None, "csv", 0, 0.1)
        runs = self.db.recent_runs()
        self.assertEqual([run.id for run in runs], [3, 2, 1])
        self.assertEqual([run.id for run in self.db.recent_runs(command="single")], [3, 1])
        self.assertEqual(len(self.db.recent_runs(limit=1)), 1)

    def test_clear_history(self):
        run = self.db.record_run("validate", {}, 1, None, "csv", 0, 0.1)
        self.db.record_criteria(run, [CriterionResult("emitter_order_invariance", "permutation", True, 0.0, 1e-12)])
        self.assertEqual(self.db.clear_history(), 1)
        self.assertEqual(DBUtil.session.query(CriterionRecord).count(), 0)
        self.assertEqual(self.db.recent_runs(), [])


if __name__ == "__main__":
    unittest.main()
